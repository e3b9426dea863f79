#include "azsc/pipeline.hpp"

#include "azsc/errors.hpp"
#include "azsc/io.hpp"
#include "azsc/utf8.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace azsc {

void TrainConfig::validate() const {
    if (batch_size == 0) throw InputError("train config: batch_size must be at least 1");
    if (epochs == 0) throw InputError("train config: epochs must be at least 1");
    if (!(holdout >= 0.0 && holdout < 1.0))
        throw InputError("train config: holdout fraction must lie in [0,1)");
    if (!(adam.learning_rate > 0.0)) throw InputError("train config: learning rate must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        throw InputError("train config: adam betas must lie in [0,1)");
    if (!(adam.epsilon > 0.0)) throw InputError("train config: adam epsilon must be positive");
}

std::vector<Batch> make_batches(const std::vector<SentencePair>& pairs, const Vocab& vocab,
                                size_t max_len, const TrainConfig& config) {
    config.validate();
    if (pairs.empty()) throw InputError("make_batches: no pairs");

    std::vector<std::vector<int>> inputs(pairs.size()), targets(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        try {
            inputs[i] = encode(pairs[i].wrong, vocab, max_len).ids;
            targets[i] = encode(pairs[i].correct, vocab, max_len).ids;
        } catch (const VocabError& e) {
            throw VocabError("pair " + std::to_string(i + 1) + ": " + e.what());
        }
    }

    std::vector<size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), size_t{0});
    if (config.shuffle) {
        Rng rng(config.seed);
        rng.shuffle(order);
    }

    std::vector<Batch> batches;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
        size_t stop = std::min(start + config.batch_size, order.size());
        Batch b;
        for (size_t k = start; k < stop; ++k) {
            b.inputs.push_back(inputs[order[k]]);
            b.targets.push_back(targets[order[k]]);
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

namespace {

double mean_loss_over(const std::vector<Batch>& batches, const ModelParams& params) {
    double weighted = 0.0;
    size_t seen = 0;
    for (const auto& b : batches) {
        weighted += forward_teacher_forced(b.inputs, b.targets, params).loss *
                    static_cast<double>(b.size());
        seen += b.size();
    }
    return weighted / static_cast<double>(seen);
}

uint64_t epoch_seed(uint64_t base, size_t epoch) {
    return Rng::splitmix64(base ^ (0x9e3779b97f4a7c15ull * (epoch + 1)));
}

} // namespace

TrainResult train(const std::vector<SentencePair>& pairs, const TrainConfig& config,
                  ModelConfig model_config, const EpochHook& hook) {
    config.validate();
    if (pairs.empty()) throw InputError("train: no training pairs");

    std::vector<std::u32string> corpus;
    corpus.reserve(pairs.size() * 2);
    for (const auto& p : pairs) {
        corpus.push_back(p.wrong);
        corpus.push_back(p.correct);
    }
    Vocab vocab = Vocab::build(corpus);
    model_config.vocab_size = vocab.size();
    model_config.validate();

    size_t n_hold = static_cast<size_t>(config.holdout * static_cast<double>(pairs.size()));
    if (n_hold >= pairs.size()) throw InputError("train: holdout leaves no training pairs");
    std::vector<SentencePair> train_pairs(pairs.begin(), pairs.end() - static_cast<ptrdiff_t>(n_hold));
    std::vector<SentencePair> hold_pairs(pairs.end() - static_cast<ptrdiff_t>(n_hold), pairs.end());

    ModelParams params = ModelParams::init(model_config, config.seed);
    AdamState adam(config.adam);
    std::vector<Tensor*> param_refs;
    params.for_each([&](const std::string&, Tensor& t) { param_refs.push_back(&t); });

    std::vector<Batch> hold_batches;
    if (!hold_pairs.empty()) {
        TrainConfig hold_cfg = config;
        hold_cfg.shuffle = false;
        hold_batches = make_batches(hold_pairs, vocab, model_config.max_len, hold_cfg);
    }

    std::vector<double> epoch_losses, holdout_losses;
    for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
        TrainConfig batch_cfg = config;
        batch_cfg.seed = epoch_seed(config.seed, epoch);
        auto batches = make_batches(train_pairs, vocab, model_config.max_len, batch_cfg);

        double weighted = 0.0;
        size_t seen = 0;
        for (size_t bi = 0; bi < batches.size(); ++bi) {
            GradResult g = loss_and_gradients(batches[bi].inputs, batches[bi].targets, params);
            if (!std::isfinite(g.loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                   " batch " + std::to_string(bi + 1));
            std::vector<const Tensor*> grad_refs;
            grad_refs.reserve(g.grads.size());
            for (const auto& t : g.grads) grad_refs.push_back(&t);
            adam.step(param_refs, grad_refs);
            weighted += g.loss * static_cast<double>(batches[bi].size());
            seen += batches[bi].size();
        }
        double train_loss = weighted / static_cast<double>(seen);
        epoch_losses.push_back(train_loss);

        double hold_loss = std::numeric_limits<double>::quiet_NaN();
        if (!hold_batches.empty()) {
            hold_loss = mean_loss_over(hold_batches, params);
            holdout_losses.push_back(hold_loss);
        }
        if (hook) hook(epoch + 1, train_loss, hold_loss);
    }

    return TrainResult{ModelCheckpoint{vocab, std::move(params)}, std::move(epoch_losses),
                       std::move(holdout_losses)};
}

std::u32string greedy_decode(std::u32string_view sentence, const ModelCheckpoint& checkpoint) {
    const ModelConfig& cfg = checkpoint.params.config;
    EncodedSentence in = encode(sentence, checkpoint.vocab, cfg.max_len);
    SentenceEncoding enc = encode_sentence(in.ids, checkpoint.params);

    Tensor h = enc.final_h, c = enc.final_c;
    std::vector<int> seq{checkpoint.vocab.start_id()};
    const int end_id = checkpoint.vocab.end_id();
    while (seq.size() < cfg.max_len) {
        DecoderStepResult step = decoder_step(seq.back(), h, c, enc, checkpoint.params);
        h = std::move(step.h);
        c = std::move(step.c);
        size_t best = 0;
        for (size_t j = 1; j < step.logits.numel(); ++j)
            if (step.logits[j] > step.logits[best]) best = j;
        seq.push_back(static_cast<int>(best));
        if (static_cast<int>(best) == end_id) break;
    }
    return decode(seq, checkpoint.vocab);
}

// ---- checkpoint serialization ----

namespace {

constexpr char kMagic[4] = {'A', 'Z', 'S', 'C'};
constexpr uint8_t kVersion = 1;

void put_u8(std::string& out, uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
    std::string_view bytes;
    const std::string& what;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > bytes.size()) throw InputError(what + ": truncated file");
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(bytes[pos++]);
    }
    uint16_t u16() {
        need(2);
        uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(static_cast<uint8_t>(bytes[pos++])) << (8 * i);
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos++])) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(bytes[pos++])) << (8 * i);
        return std::bit_cast<double>(v);
    }
    std::string_view raw(size_t n) {
        need(n);
        std::string_view s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
    bool done() const { return pos == bytes.size(); }
};

std::string shape_text(const std::vector<size_t>& dims) {
    std::string s = "[";
    for (size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

} // namespace

std::string serialize_checkpoint(const ModelCheckpoint& checkpoint) {
    const ModelConfig& cfg = checkpoint.params.config;
    if (cfg.vocab_size != checkpoint.vocab.size())
        throw InputError("checkpoint: vocab holds " + std::to_string(checkpoint.vocab.size()) +
                         " ids but the config says " + std::to_string(cfg.vocab_size));

    std::string out;
    out.append(kMagic, 4);
    put_u8(out, kVersion);
    put_u32(out, static_cast<uint32_t>(cfg.vocab_size));
    put_u32(out, static_cast<uint32_t>(cfg.embed_dim));
    put_u32(out, static_cast<uint32_t>(cfg.units));
    put_u32(out, static_cast<uint32_t>(cfg.encoder_depth));
    put_u32(out, static_cast<uint32_t>(cfg.max_len));

    auto entries = checkpoint.vocab.entries();
    put_u32(out, static_cast<uint32_t>(entries.size()));
    for (const auto& [id, ch] : entries) {
        put_u32(out, static_cast<uint32_t>(id));
        std::string bytes = utf8::encode(ch);
        put_u32(out, static_cast<uint32_t>(bytes.size()));
        out += bytes;
    }

    size_t n_tensors = 0;
    checkpoint.params.for_each([&](const std::string&, const Tensor&) { ++n_tensors; });
    put_u32(out, static_cast<uint32_t>(n_tensors));
    checkpoint.params.for_each([&](const std::string& name, const Tensor& t) {
        put_u16(out, static_cast<uint16_t>(name.size()));
        out += name;
        put_u8(out, static_cast<uint8_t>(t.rank()));
        for (size_t d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
        for (size_t i = 0; i < t.numel(); ++i) put_f64(out, t[i]);
    });
    return out;
}

ModelCheckpoint parse_checkpoint(std::string_view bytes, const std::string& what) {
    Reader r{bytes, what};
    std::string_view magic = r.raw(4);
    if (std::string_view(kMagic, 4) != magic) throw InputError(what + ": bad magic");
    uint8_t version = r.u8();
    if (version != kVersion)
        throw InputError(what + ": unsupported version " + std::to_string(version));

    ModelConfig cfg;
    cfg.vocab_size = r.u32();
    cfg.embed_dim = r.u32();
    cfg.units = r.u32();
    cfg.encoder_depth = r.u32();
    cfg.max_len = r.u32();
    cfg.validate();

    uint32_t n_vocab = r.u32();
    std::vector<std::pair<int, char32_t>> entries;
    entries.reserve(n_vocab);
    for (uint32_t i = 0; i < n_vocab; ++i) {
        uint32_t id = r.u32();
        uint32_t len = r.u32();
        std::u32string ch = utf8::decode(r.raw(len), what + " vocab entry");
        if (ch.size() != 1)
            throw InputError(what + ": vocab entry for id " + std::to_string(id) +
                             " is not a single character");
        entries.emplace_back(static_cast<int>(id), ch[0]);
    }
    Vocab vocab = Vocab::from_entries(entries);
    if (vocab.size() != cfg.vocab_size)
        throw InputError(what + ": vocab holds " + std::to_string(vocab.size()) +
                         " ids but the config says " + std::to_string(cfg.vocab_size));

    ModelParams params = ModelParams::zeros(cfg);
    std::unordered_map<std::string, Tensor*> expected;
    params.for_each([&](const std::string& name, Tensor& t) { expected[name] = &t; });

    uint32_t n_tensors = r.u32();
    std::unordered_set<std::string> seen;
    for (uint32_t i = 0; i < n_tensors; ++i) {
        uint16_t name_len = r.u16();
        std::string name(r.raw(name_len));
        auto it = expected.find(name);
        if (it == expected.end()) throw InputError(what + ": unexpected tensor '" + name + "'");
        if (!seen.insert(name).second)
            throw InputError(what + ": duplicate tensor '" + name + "'");

        uint8_t rank = r.u8();
        std::vector<size_t> dims(rank);
        for (uint8_t d = 0; d < rank; ++d) dims[d] = r.u32();
        Tensor& dst = *it->second;
        if (dims != dst.shape())
            throw InputError(what + ": shape mismatch for tensor '" + name + "': file says " +
                             shape_text(dims) + ", model needs " + shape_text(dst.shape()));
        for (size_t j = 0; j < dst.numel(); ++j) dst[j] = r.f64();
    }
    for (const auto& [name, t] : expected) {
        (void)t;
        if (!seen.count(name)) throw InputError(what + ": missing tensor '" + name + "'");
    }
    if (!r.done()) throw InputError(what + ": trailing bytes after the last tensor");

    return ModelCheckpoint{vocab, std::move(params)};
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path) {
    write_file(path, serialize_checkpoint(checkpoint));
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const InputError&) {
        throw InputError("cannot open checkpoint '" + path + "'");
    }
    return parse_checkpoint(bytes, "checkpoint '" + path + "'");
}

} // namespace azsc
