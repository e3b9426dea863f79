#include "azsc/corruptor.hpp"
#include "azsc/editdist.hpp"
#include "azsc/errors.hpp"
#include "azsc/eval.hpp"
#include "azsc/io.hpp"
#include "azsc/pipeline.hpp"
#include "azsc/utf8.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace azsc;

struct GenArgs {
    std::string corpus, confusion, out;
    size_t count = 12000;
    uint64_t seed = 0;
};

struct TrainArgs {
    std::string pairs, out;
    size_t epochs = 10;
    size_t batch = 40;
    size_t embed_dim = 500;
    size_t units = 500;
    size_t encoder_depth = 3;
    size_t max_len = 20;
    uint64_t seed = 0;
    double holdout = 0.0;
    double lr = 0.001;
};

struct CorrectArgs {
    std::string model, text, in, out;
};

struct EvalArgs {
    std::string model, test, baseline_dict, report, baseline_report;
    size_t max_distance = 3;
    std::string granularity = "word";
};

struct DistanceArgs {
    std::string a, b;
    bool damerau = false;
};

// File lines in the usual sense: the trailing newline does not open an
// extra empty line.
std::vector<std::string> input_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line =
            (nl == std::string::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = (nl == std::string::npos) ? text.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

int run_gen(const GenArgs& args) {
    std::vector<std::u32string> corpus = read_corpus(args.corpus);
    ConfusionTable table = ConfusionTable::parse(read_file(args.confusion));
    NoiseConfig noise;
    noise.seed = args.seed;

    OpStats stats;
    std::vector<SentencePair> pairs = generate_pairs(corpus, args.count, table, noise, &stats);
    write_pairs_tsv(args.out, pairs);

    std::cout << "rng\tmt19937_64\n"
              << "pairs\t" << pairs.size() << "\n"
              << "words\t" << stats.words << "\n"
              << "unchanged\t" << stats.unchanged << "\n"
              << "substitutions\t" << stats.substitutions << "\n"
              << "insertions\t" << stats.insertions << "\n"
              << "deletions\t" << stats.deletions << "\n"
              << "transpositions\t" << stats.transpositions << "\n";
    return 0;
}

int run_train(const TrainArgs& args) {
    std::vector<SentencePair> pairs = read_pairs_tsv(args.pairs);

    TrainConfig config;
    config.batch_size = args.batch;
    config.epochs = args.epochs;
    config.seed = args.seed;
    config.holdout = args.holdout;
    config.adam.learning_rate = args.lr;

    ModelConfig model_config;
    model_config.embed_dim = args.embed_dim;
    model_config.units = args.units;
    model_config.encoder_depth = args.encoder_depth;
    model_config.max_len = args.max_len;
    model_config.vocab_size = 1; // replaced by the vocabulary built in train()

    char buf[96];
    bool with_holdout = args.holdout > 0.0;
    TrainResult result =
        train(pairs, config, model_config, [&](size_t epoch, double loss, double hold) {
            if (with_holdout)
                std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\n", epoch, loss, hold);
            else
                std::snprintf(buf, sizeof buf, "%zu\t%.6f\n", epoch, loss);
            std::cout << buf << std::flush;
        });
    save_checkpoint(result.checkpoint, args.out);
    return 0;
}

int run_correct(const CorrectArgs& args) {
    ModelCheckpoint checkpoint = load_checkpoint(args.model);

    std::vector<std::string> lines;
    if (!args.text.empty())
        lines.push_back(args.text);
    else
        lines = input_lines(read_file(args.in));

    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::u32string line =
            utf8::decode(lines[i], "input line " + std::to_string(i + 1));
        if (!line.empty()) line = greedy_decode(line, checkpoint);
        out += utf8::encode(line);
        out.push_back('\n');
    }
    if (args.out.empty())
        std::cout << out;
    else
        write_file(args.out, out);
    return 0;
}

int run_eval(const EvalArgs& args) {
    ModelCheckpoint checkpoint = load_checkpoint(args.model);
    std::vector<SentencePair> test_pairs = read_pairs_tsv(args.test);
    Granularity granularity =
        args.granularity == "sentence" ? Granularity::sentence : Granularity::word;

    char buf[64];
    EvalReport model_report = evaluate_model(checkpoint, test_pairs, args.max_distance, granularity);
    for (size_t d = 0; d < model_report.accuracy_at.size(); ++d) {
        std::snprintf(buf, sizeof buf, "model\t%zu\t%.6f\n", d, model_report.accuracy_at[d]);
        std::cout << buf;
    }
    if (!args.report.empty()) write_file(args.report, format_report(model_report));

    if (!args.baseline_dict.empty()) {
        Dictionary dict = Dictionary::load(args.baseline_dict);
        EvalReport base_report = evaluate_baseline(dict, test_pairs, args.max_distance, granularity);
        for (size_t d = 0; d < base_report.accuracy_at.size(); ++d) {
            std::snprintf(buf, sizeof buf, "baseline\t%zu\t%.6f\n", d, base_report.accuracy_at[d]);
            std::cout << buf;
        }
        if (!args.baseline_report.empty())
            write_file(args.baseline_report, format_report(base_report));
    }
    return 0;
}

int run_distance(const DistanceArgs& args) {
    std::u32string a = utf8::decode(args.a, "first argument");
    std::u32string b = utf8::decode(args.b, "second argument");
    size_t d = args.damerau ? damerau_levenshtein(a, b) : levenshtein(a, b);
    std::cout << d << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Character-level spelling correction toolkit"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "Generate synthetic (wrong, correct) pairs");
    gen->add_option("--corpus", gen_args.corpus, "Correct sentences, one per line")->required();
    gen->add_option("--confusion", gen_args.confusion, "Confusion table TSV")->required();
    gen->add_option("--count", gen_args.count, "Number of pairs")->capture_default_str();
    gen->add_option("--seed", gen_args.seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_args.out, "Output pairs TSV")->required();

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train a correction model");
    train->add_option("--pairs", train_args.pairs, "Training pairs TSV")->required();
    train->add_option("--epochs", train_args.epochs, "Training epochs")->capture_default_str();
    train->add_option("--batch", train_args.batch, "Batch size")->capture_default_str();
    train->add_option("--embed-dim", train_args.embed_dim, "Embedding dimension")->capture_default_str();
    train->add_option("--units", train_args.units, "LSTM units")->capture_default_str();
    train->add_option("--encoder-depth", train_args.encoder_depth, "Stacked encoder layers")->capture_default_str();
    train->add_option("--max-len", train_args.max_len, "Sequence length budget")->capture_default_str();
    train->add_option("--seed", train_args.seed, "RNG seed")->capture_default_str();
    train->add_option("--holdout", train_args.holdout, "Holdout fraction for loss reporting")->capture_default_str();
    train->add_option("--lr", train_args.lr, "Adam learning rate")->capture_default_str();
    train->add_option("--out", train_args.out, "Checkpoint output path")->required();

    CorrectArgs correct_args;
    CLI::App* correct = app.add_subcommand("correct", "Correct text with a trained model");
    correct->add_option("--model", correct_args.model, "Checkpoint path")->required();
    CLI::Option* text_opt = correct->add_option("--text", correct_args.text, "Single sentence");
    CLI::Option* in_opt = correct->add_option("--in", correct_args.in, "Input file, one sentence per line");
    text_opt->excludes(in_opt);
    correct->add_option("--out", correct_args.out, "Output file (default stdout)");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score a model on a test set");
    eval->add_option("--model", eval_args.model, "Checkpoint path")->required();
    eval->add_option("--test", eval_args.test, "Test pairs TSV")->required();
    eval->add_option("--max-distance", eval_args.max_distance, "Largest distance bucket")->capture_default_str();
    eval->add_option("--granularity", eval_args.granularity, "word or sentence")
        ->capture_default_str()
        ->check(CLI::IsMember({"word", "sentence"}));
    eval->add_option("--baseline-dict", eval_args.baseline_dict,
                     "Dictionary for the lookup baseline");
    eval->add_option("--report", eval_args.report, "Write the model's full report here");
    eval->add_option("--baseline-report", eval_args.baseline_report,
                     "Write the baseline's full report here");

    DistanceArgs distance_args;
    CLI::App* distance = app.add_subcommand("distance", "Edit distance between two strings");
    distance->add_option("a", distance_args.a, "First string")->required();
    distance->add_option("b", distance_args.b, "Second string")->required();
    distance->add_flag("--damerau", distance_args.damerau, "Count adjacent transpositions as 1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return run_gen(gen_args);
        if (train->parsed()) return run_train(train_args);
        if (correct->parsed()) {
            if (correct_args.text.empty() && correct_args.in.empty()) {
                std::cerr << "error: correct needs --text or --in\n";
                return 2;
            }
            return run_correct(correct_args);
        }
        if (eval->parsed()) return run_eval(eval_args);
        if (distance->parsed()) return run_distance(distance_args);
    } catch (const VocabError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
