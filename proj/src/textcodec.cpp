#include "azsc/textcodec.hpp"

#include "azsc/errors.hpp"
#include "azsc/utf8.hpp"

#include <algorithm>

namespace azsc {

Vocab Vocab::build(const std::vector<std::u32string>& corpus) {
    if (corpus.empty()) throw InputError("empty corpus");

    Vocab v;
    v.id_to_char_.push_back(0); // pad slot
    auto assign = [&v](char32_t c) {
        // NUL marks an unused id slot internally and cannot be a vocab entry.
        if (c == 0) throw InputError("corpus contains a NUL character");
        if (v.char_to_id_.count(c)) return;
        const int id = static_cast<int>(v.id_to_char_.size());
        v.char_to_id_.emplace(c, id);
        v.id_to_char_.push_back(c);
    };
    assign(start_marker);
    assign(end_marker);
    for (const auto& sentence : corpus) {
        for (char32_t c : sentence) assign(c);
    }
    v.start_id_ = v.char_to_id_.at(start_marker);
    v.end_id_ = v.char_to_id_.at(end_marker);
    return v;
}

Vocab Vocab::from_entries(const std::vector<std::pair<int, char32_t>>& entries) {
    Vocab v;
    v.id_to_char_.assign(entries.size() + 1, 0);
    for (const auto& [id, c] : entries) {
        if (c == 0) throw InputError("invalid vocab entry: NUL character");
        if (id <= 0 || static_cast<size_t>(id) > entries.size()) {
            throw InputError("invalid vocab entry: id " + std::to_string(id) + " outside 1.." +
                             std::to_string(entries.size()));
        }
        if (!v.char_to_id_.emplace(c, id).second) {
            throw InputError("invalid vocab entry: duplicate character '" + utf8::encode(c) + "'");
        }
        if (v.id_to_char_[static_cast<size_t>(id)] != 0) {
            throw InputError("invalid vocab entry: duplicate id " + std::to_string(id));
        }
        v.id_to_char_[static_cast<size_t>(id)] = c;
    }
    auto start_it = v.char_to_id_.find(start_marker);
    auto end_it = v.char_to_id_.find(end_marker);
    if (start_it == v.char_to_id_.end() || end_it == v.char_to_id_.end()) {
        throw InputError("invalid vocab: start or end marker missing");
    }
    v.start_id_ = start_it->second;
    v.end_id_ = end_it->second;
    return v;
}

int Vocab::id_of(char32_t c) const {
    auto it = char_to_id_.find(c);
    if (it == char_to_id_.end()) {
        throw VocabError("unknown character '" + utf8::encode(c) + "'");
    }
    return it->second;
}

char32_t Vocab::char_of(int id) const {
    if (id <= 0 || static_cast<size_t>(id) >= id_to_char_.size()) {
        throw VocabError("unknown id " + std::to_string(id));
    }
    return id_to_char_[static_cast<size_t>(id)];
}

std::vector<std::pair<int, char32_t>> Vocab::entries() const {
    std::vector<std::pair<int, char32_t>> out;
    out.reserve(id_to_char_.size() - 1);
    for (size_t id = 1; id < id_to_char_.size(); ++id) {
        out.emplace_back(static_cast<int>(id), id_to_char_[id]);
    }
    return out;
}

EncodedSentence encode(std::u32string_view sentence, const Vocab& vocab, size_t max_len) {
    if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");

    std::vector<int> ids;
    ids.reserve(sentence.size() + 2);
    ids.push_back(vocab.start_id());
    for (size_t i = 0; i < sentence.size(); ++i) {
        auto c = sentence[i];
        if (!vocab.contains(c)) {
            throw VocabError("unknown character '" + utf8::encode(c) + "' at position " + std::to_string(i));
        }
        ids.push_back(vocab.id_of(c));
    }
    ids.push_back(vocab.end_id());

    EncodedSentence out;
    if (ids.size() > max_len) {
        // pre-truncation: drop from the beginning
        out.ids.assign(ids.end() - static_cast<std::ptrdiff_t>(max_len), ids.end());
        out.source_len = max_len;
    } else {
        out.ids = std::move(ids);
        out.source_len = out.ids.size();
        out.ids.resize(max_len, Vocab::pad_id); // post-padding
    }
    return out;
}

std::u32string decode(std::span<const int> ids, const Vocab& vocab) {
    std::u32string text;
    text.reserve(ids.size());
    for (int id : ids) {
        if (id == Vocab::pad_id) continue;
        text.push_back(vocab.char_of(id));
    }
    if (!text.empty() && text.front() == Vocab::start_marker) text.erase(text.begin());
    const auto stop = text.find(Vocab::end_marker);
    if (stop != std::u32string::npos) text.resize(stop);
    return text;
}

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

std::vector<std::u32string> split_words(std::u32string_view text) {
    std::vector<std::u32string> words;
    std::u32string cur;
    for (char32_t c : text) {
        if (is_space(c)) {
            if (!cur.empty()) {
                words.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

std::u32string join_words(const std::vector<std::u32string>& words) {
    std::u32string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out.push_back(U' ');
        out += words[i];
    }
    return out;
}

} // namespace azsc
