#pragma once

#include "azsc/corruptor.hpp"
#include "azsc/pipeline.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace azsc {

/// Whether pairs are scored as whole sentences or as index-aligned words
/// (the word view splits prediction and gold; a missing side compares
/// against the empty string).
enum class Granularity { word, sentence };

struct ExampleRecord {
    std::u32string input;
    std::u32string prediction;
    std::u32string gold;
    size_t distance = 0; // levenshtein(prediction, gold)
};

struct EvalReport {
    size_t n_examples = 0;
    std::vector<double> accuracy_at; // index d: fraction with distance <= d
    std::vector<ExampleRecord> records;
};

/// Fraction of aligned pairs with levenshtein(prediction, gold) <= d.
double accuracy_at_distance(const std::vector<std::u32string>& predictions,
                            const std::vector<std::u32string>& golds, size_t d);

/// Known-correct words with optional frequency counts. Duplicate words merge
/// by summing counts.
class Dictionary {
public:
    /// One word per line, optional `<TAB>count`.
    static Dictionary parse(std::string_view document, const std::string& what = "dictionary");
    static Dictionary load(const std::string& path);

    void add(std::u32string word, uint64_t count = 1);
    bool contains(const std::u32string& word) const { return words_.count(word) != 0; }
    size_t size() const { return words_.size(); }
    bool empty() const { return words_.empty(); }
    const std::map<std::u32string, uint64_t>& entries() const { return words_; }

private:
    std::map<std::u32string, uint64_t> words_;
};

/// Exact hits pass through; otherwise the entry minimizing
/// damerau_levenshtein wins, ties broken by higher count then
/// lexicographically smaller word.
std::u32string dictionary_correct(const std::u32string& word, const Dictionary& dict);

EvalReport evaluate_model(const ModelCheckpoint& checkpoint,
                          const std::vector<SentencePair>& test_pairs, size_t max_d,
                          Granularity granularity = Granularity::word);

/// Corrects each input word by dictionary lookup, then scores exactly as
/// evaluate_model does.
EvalReport evaluate_baseline(const Dictionary& dict, const std::vector<SentencePair>& test_pairs,
                             size_t max_d, Granularity granularity = Granularity::word);

/// TSV: `d<TAB>accuracy` summary rows, then per-example
/// `input<TAB>prediction<TAB>gold<TAB>distance` rows.
std::string format_report(const EvalReport& report);

} // namespace azsc
