#pragma once

#include "azsc/rng.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace azsc {

/// Map from a correct letter to the misspellings people actually type for
/// it. Duplicate keys in the source merge their lists in order.
class ConfusionTable {
public:
    /// One entry per line: <letter>TAB<comma-separated misspellings>.
    /// Lines starting with '#' and blank lines are ignored. Each misspelling
    /// is 1 or 2 characters.
    static ConfusionTable parse(std::string_view document);

    void add(char32_t letter, std::u32string misspelling);

    /// nullptr when the letter has no entry.
    const std::vector<std::u32string>* find(char32_t letter) const;

    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    std::map<char32_t, std::vector<std::u32string>> entries_;
};

struct NoiseConfig {
    double p_word = 0.5;               // probability a word is corrupted at all
    double p_substitution = 0.6;       // shares of the four operations, summing to 1
    double p_insert = (1.0 - 0.6) / 3.0;
    double p_delete = (1.0 - 0.6) / 3.0;
    double p_transpose = (1.0 - 0.6) / 3.0;
    uint64_t seed = 0;

    void validate() const;
};

struct SentencePair {
    std::u32string wrong;
    std::u32string correct;
};

/// Tallies of corruption decisions, for frequency reporting.
struct OpStats {
    size_t words = 0;
    size_t unchanged = 0;
    size_t substitutions = 0;
    size_t insertions = 0;
    size_t deletions = 0;
    size_t transpositions = 0;

    size_t applied() const { return substitutions + insertions + deletions + transpositions; }
};

/// Applies at most one operation to the word. `alphabet` supplies letters
/// for insertion and for substitution of letters with no confusion entry;
/// when empty, the word's own letters are used.
std::u32string corrupt_word(std::u32string_view word, const ConfusionTable& table,
                            const NoiseConfig& config, std::u32string_view alphabet, Rng& rng,
                            OpStats* stats = nullptr);

/// Whitespace-splits, corrupts each word independently, rejoins with single
/// spaces.
std::u32string corrupt_sentence(std::u32string_view sentence, const ConfusionTable& table,
                                const NoiseConfig& config, std::u32string_view alphabet, Rng& rng,
                                OpStats* stats = nullptr);

/// Cycles through the corpus emitting (corrupted, original) pairs until
/// `count` pairs exist. Deterministic for a given config.seed. The alphabet
/// is the sorted set of non-whitespace characters in the corpus.
std::vector<SentencePair> generate_pairs(const std::vector<std::u32string>& corpus, size_t count,
                                         const ConfusionTable& table, const NoiseConfig& config,
                                         OpStats* stats = nullptr);

/// Sorted distinct non-whitespace characters of the corpus.
std::u32string corpus_alphabet(const std::vector<std::u32string>& corpus);

} // namespace azsc
