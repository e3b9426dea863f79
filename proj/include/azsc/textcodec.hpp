#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace azsc {

/// Bijection between characters and integer ids. Id 0 is reserved for
/// padding, "<" and ">" are the sequence start/end markers. Immutable after
/// construction and safe to share across threads.
class Vocab {
public:
    static constexpr int pad_id = 0;
    static constexpr char32_t start_marker = U'<';
    static constexpr char32_t end_marker = U'>';

    /// Markers get ids 1 and 2, every other distinct character gets the next
    /// id in order of first appearance across the corpus.
    static Vocab build(const std::vector<std::u32string>& corpus);

    /// Rebuild from explicit (id, character) entries, e.g. a checkpoint.
    /// Ids must be exactly 1..entries.size() and both markers present.
    static Vocab from_entries(const std::vector<std::pair<int, char32_t>>& entries);

    /// Distinct ids including the pad id.
    size_t size() const { return id_to_char_.size(); }
    int start_id() const { return start_id_; }
    int end_id() const { return end_id_; }

    bool contains(char32_t c) const { return char_to_id_.count(c) != 0; }
    int id_of(char32_t c) const;
    char32_t char_of(int id) const;

    /// (id, character) pairs in ascending id order; excludes the pad id.
    std::vector<std::pair<int, char32_t>> entries() const;

private:
    Vocab() = default;
    std::unordered_map<char32_t, int> char_to_id_;
    std::vector<char32_t> id_to_char_; // index = id; slot 0 unused
    int start_id_ = 0;
    int end_id_ = 0;
};

struct EncodedSentence {
    std::vector<int> ids;  // length exactly max_len
    size_t source_len = 0; // count of non-pad ids
};

/// "<" + sentence + ">", truncated from the front when longer than max_len
/// and zero-padded at the back when shorter.
EncodedSentence encode(std::u32string_view sentence, const Vocab& vocab, size_t max_len);

/// Characters of the non-pad ids, with a leading "<" and the first ">" and
/// everything after it stripped.
std::u32string decode(std::span<const int> ids, const Vocab& vocab);

bool is_space(char32_t c);

/// Whitespace-separated tokens, empties dropped.
std::vector<std::u32string> split_words(std::u32string_view text);

/// Tokens joined with single spaces.
std::u32string join_words(const std::vector<std::u32string>& words);

} // namespace azsc
