#include "azsc/corruptor.hpp"

#include "azsc/errors.hpp"
#include "azsc/textcodec.hpp"
#include "azsc/utf8.hpp"

#include <cmath>
#include <set>
#include <string>

namespace azsc {

namespace {

[[noreturn]] void line_error(size_t line_no, const std::string& what) {
    throw InputError("confusion table line " + std::to_string(line_no) + ": " + what);
}

} // namespace

ConfusionTable ConfusionTable::parse(std::string_view document) {
    ConfusionTable table;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= document.size()) {
        size_t nl = document.find('\n', pos);
        std::string_view raw = (nl == std::string_view::npos)
                                   ? document.substr(pos)
                                   : document.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? document.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (raw.empty() || raw.front() == '#') continue;

        std::u32string line = utf8::decode(raw, "confusion table line " + std::to_string(line_no));
        size_t tab = line.find(U'\t');
        if (tab == std::u32string::npos)
            line_error(line_no, "expected <letter>TAB<comma-separated misspellings>");
        if (tab != 1)
            line_error(line_no, "key must be exactly one character");

        char32_t key = line[0];
        if (is_space(key)) line_error(line_no, "key must not be whitespace");
        std::u32string_view values(line.data() + tab + 1, line.size() - tab - 1);
        size_t added = 0;
        size_t start = 0;
        while (start <= values.size()) {
            size_t comma = values.find(U',', start);
            std::u32string_view item = (comma == std::u32string_view::npos)
                                           ? values.substr(start)
                                           : values.substr(start, comma - start);
            start = (comma == std::u32string_view::npos) ? values.size() + 1 : comma + 1;
            if (item.empty()) line_error(line_no, "empty misspelling");
            if (item.size() > 2) line_error(line_no, "misspelling longer than 2 characters");
            for (char32_t c : item)
                if (is_space(c)) line_error(line_no, "misspelling must not contain whitespace");
            table.add(key, std::u32string(item));
            ++added;
        }
        if (added == 0) line_error(line_no, "empty misspelling");
    }
    return table;
}

void ConfusionTable::add(char32_t letter, std::u32string misspelling) {
    entries_[letter].push_back(std::move(misspelling));
}

const std::vector<std::u32string>* ConfusionTable::find(char32_t letter) const {
    auto it = entries_.find(letter);
    return it == entries_.end() ? nullptr : &it->second;
}

void NoiseConfig::validate() const {
    for (double p : {p_word, p_substitution, p_insert, p_delete, p_transpose}) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InputError("noise config: probabilities must lie in [0,1]");
    }
    double sum = p_substitution + p_insert + p_delete + p_transpose;
    if (std::fabs(sum - 1.0) > 1e-12)
        throw InputError("noise config: operation probabilities must sum to 1");
}

std::u32string corrupt_word(std::u32string_view word, const ConfusionTable& table,
                            const NoiseConfig& config, std::u32string_view alphabet, Rng& rng,
                            OpStats* stats) {
    if (word.empty()) return std::u32string();
    if (stats) ++stats->words;

    // Fixed draw order so datasets are reproducible across revisions:
    //   1. bernoulli(p_word)   corrupt at all?
    //   2. uniform()           which operation, by cumulative shares
    //   3. uniform_index       position
    //   4. uniform_index       replacement choice (substitution and insertion only)
    if (!rng.bernoulli(config.p_word)) {
        if (stats) ++stats->unchanged;
        return std::u32string(word);
    }

    // Letters for insertion and for substitution without a confusion entry.
    std::u32string_view source = alphabet.empty() ? word : alphabet;

    std::u32string out(word);
    double u = rng.uniform();
    if (u < config.p_substitution) {
        if (stats) ++stats->substitutions;
        size_t at = rng.uniform_index(out.size());
        if (const auto* entry = table.find(out[at])) {
            const std::u32string& repl = (*entry)[rng.uniform_index(entry->size())];
            out.replace(at, 1, repl);
        } else {
            out[at] = source[rng.uniform_index(source.size())];
        }
    } else if (u < config.p_substitution + config.p_insert) {
        if (stats) ++stats->insertions;
        size_t at = rng.uniform_index(out.size() + 1);
        char32_t letter = source[rng.uniform_index(source.size())];
        out.insert(out.begin() + static_cast<ptrdiff_t>(at), letter);
    } else if (u < config.p_substitution + config.p_insert + config.p_delete) {
        if (stats) ++stats->deletions;
        size_t at = rng.uniform_index(out.size());
        // Never emit an empty word; deleting the only letter is identity.
        if (out.size() > 1) out.erase(out.begin() + static_cast<ptrdiff_t>(at));
    } else {
        if (stats) ++stats->transpositions;
        if (out.size() > 1) {
            size_t at = rng.uniform_index(out.size() - 1);
            std::swap(out[at], out[at + 1]);
        }
    }
    return out;
}

std::u32string corrupt_sentence(std::u32string_view sentence, const ConfusionTable& table,
                                const NoiseConfig& config, std::u32string_view alphabet, Rng& rng,
                                OpStats* stats) {
    std::vector<std::u32string> words = split_words(sentence);
    std::u32string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out.push_back(U' ');
        out += corrupt_word(words[i], table, config, alphabet, rng, stats);
    }
    return out;
}

std::u32string corpus_alphabet(const std::vector<std::u32string>& corpus) {
    std::set<char32_t> letters;
    for (const auto& sentence : corpus)
        for (char32_t c : sentence)
            if (!is_space(c)) letters.insert(c);
    return std::u32string(letters.begin(), letters.end());
}

std::vector<SentencePair> generate_pairs(const std::vector<std::u32string>& corpus, size_t count,
                                         const ConfusionTable& table, const NoiseConfig& config,
                                         OpStats* stats) {
    if (corpus.empty()) throw InputError("generate_pairs: corpus is empty");
    if (count == 0) throw InputError("generate_pairs: count must be at least 1");
    config.validate();
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (split_words(corpus[i]).empty())
            throw InputError("generate_pairs: corpus sentence " + std::to_string(i + 1) +
                             " is empty");
    }

    std::u32string alphabet = corpus_alphabet(corpus);
    Rng rng(config.seed);
    std::vector<SentencePair> pairs;
    pairs.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        const std::u32string& correct = corpus[i % corpus.size()];
        pairs.push_back({corrupt_sentence(correct, table, config, alphabet, rng, stats), correct});
    }
    return pairs;
}

} // namespace azsc
