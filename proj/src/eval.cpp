#include "azsc/eval.hpp"

#include "azsc/editdist.hpp"
#include "azsc/errors.hpp"
#include "azsc/io.hpp"
#include "azsc/textcodec.hpp"
#include "azsc/utf8.hpp"

#include <charconv>
#include <cstdio>
#include <functional>

namespace azsc {

double accuracy_at_distance(const std::vector<std::u32string>& predictions,
                            const std::vector<std::u32string>& golds, size_t d) {
    if (predictions.size() != golds.size())
        throw InputError("accuracy_at_distance: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(golds.size()) + " golds");
    if (predictions.empty()) throw InputError("accuracy_at_distance: no examples");
    size_t hits = 0;
    for (size_t i = 0; i < predictions.size(); ++i)
        if (levenshtein(predictions[i], golds[i]) <= d) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

Dictionary Dictionary::parse(std::string_view document, const std::string& what) {
    Dictionary dict;
    size_t pos = 0;
    size_t line_no = 0;
    while (pos <= document.size()) {
        size_t nl = document.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos) ? document.substr(pos)
                                                               : document.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? document.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::string where = what + " line " + std::to_string(line_no);

        std::string_view word_part = line;
        uint64_t count = 1;
        size_t tab = line.find('\t');
        if (tab != std::string_view::npos) {
            word_part = line.substr(0, tab);
            std::string_view count_part = line.substr(tab + 1);
            if (count_part.find('\t') != std::string_view::npos)
                throw InputError(where + ": more than two fields");
            auto [end, ec] = std::from_chars(count_part.data(),
                                             count_part.data() + count_part.size(), count);
            if (ec != std::errc() || end != count_part.data() + count_part.size())
                throw InputError(where + ": count is not a non-negative integer");
        }
        if (word_part.empty()) throw InputError(where + ": empty word");
        std::u32string word = utf8::decode(word_part, where);
        for (char32_t c : word)
            if (is_space(c)) throw InputError(where + ": word contains whitespace");
        dict.add(std::move(word), count);
    }
    return dict;
}

Dictionary Dictionary::load(const std::string& path) {
    return parse(read_file(path), "'" + path + "'");
}

void Dictionary::add(std::u32string word, uint64_t count) { words_[std::move(word)] += count; }

std::u32string dictionary_correct(const std::u32string& word, const Dictionary& dict) {
    if (dict.empty()) throw InputError("dictionary_correct: empty dictionary");
    if (dict.contains(word)) return word;

    const std::u32string* best = nullptr;
    size_t best_d = 0;
    uint64_t best_n = 0;
    // Map order is lexicographic, so on full ties the first candidate wins.
    for (const auto& [entry, count] : dict.entries()) {
        size_t d = damerau_levenshtein(word, entry);
        if (!best || d < best_d || (d == best_d && count > best_n)) {
            best = &entry;
            best_d = d;
            best_n = count;
        }
    }
    return *best;
}

namespace {

EvalReport score_predictions(const std::vector<std::u32string>& inputs,
                             const std::vector<std::u32string>& predictions,
                             const std::vector<std::u32string>& golds, size_t max_d,
                             Granularity granularity) {
    EvalReport report;
    auto add = [&](std::u32string in, std::u32string pred, std::u32string gold) {
        size_t d = levenshtein(pred, gold);
        report.records.push_back({std::move(in), std::move(pred), std::move(gold), d});
    };

    for (size_t i = 0; i < golds.size(); ++i) {
        if (granularity == Granularity::sentence) {
            add(inputs[i], predictions[i], golds[i]);
            continue;
        }
        auto in_words = split_words(inputs[i]);
        auto pred_words = split_words(predictions[i]);
        auto gold_words = split_words(golds[i]);
        size_t n = std::max(pred_words.size(), gold_words.size());
        for (size_t k = 0; k < n; ++k) {
            add(k < in_words.size() ? in_words[k] : std::u32string(),
                k < pred_words.size() ? pred_words[k] : std::u32string(),
                k < gold_words.size() ? gold_words[k] : std::u32string());
        }
    }

    report.n_examples = report.records.size();
    for (size_t d = 0; d <= max_d; ++d) {
        size_t hits = 0;
        for (const auto& rec : report.records)
            if (rec.distance <= d) ++hits;
        report.accuracy_at.push_back(static_cast<double>(hits) /
                                     static_cast<double>(report.records.size()));
    }
    return report;
}

EvalReport evaluate_with(const std::function<std::u32string(const std::u32string&)>& correct,
                         const std::vector<SentencePair>& test_pairs, size_t max_d,
                         Granularity granularity) {
    if (test_pairs.empty()) throw InputError("evaluate: empty test set");
    std::vector<std::u32string> inputs, predictions, golds;
    inputs.reserve(test_pairs.size());
    for (const auto& pair : test_pairs) {
        inputs.push_back(pair.wrong);
        predictions.push_back(correct(pair.wrong));
        golds.push_back(pair.correct);
    }
    return score_predictions(inputs, predictions, golds, max_d, granularity);
}

} // namespace

EvalReport evaluate_model(const ModelCheckpoint& checkpoint,
                          const std::vector<SentencePair>& test_pairs, size_t max_d,
                          Granularity granularity) {
    return evaluate_with(
        [&](const std::u32string& wrong) { return greedy_decode(wrong, checkpoint); }, test_pairs,
        max_d, granularity);
}

EvalReport evaluate_baseline(const Dictionary& dict, const std::vector<SentencePair>& test_pairs,
                             size_t max_d, Granularity granularity) {
    return evaluate_with(
        [&](const std::u32string& wrong) {
            auto words = split_words(wrong);
            for (auto& w : words) w = dictionary_correct(w, dict);
            return join_words(words);
        },
        test_pairs, max_d, granularity);
}

std::string format_report(const EvalReport& report) {
    std::string out;
    char buf[64];
    for (size_t d = 0; d < report.accuracy_at.size(); ++d) {
        std::snprintf(buf, sizeof buf, "%zu\t%.6f\n", d, report.accuracy_at[d]);
        out += buf;
    }
    for (const auto& rec : report.records) {
        out += utf8::encode(rec.input);
        out.push_back('\t');
        out += utf8::encode(rec.prediction);
        out.push_back('\t');
        out += utf8::encode(rec.gold);
        out.push_back('\t');
        out += std::to_string(rec.distance);
        out.push_back('\n');
    }
    return out;
}

} // namespace azsc
