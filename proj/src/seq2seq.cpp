#include "azsc/seq2seq.hpp"

#include "azsc/errors.hpp"
#include "azsc/tape.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace azsc {

void ModelConfig::validate() const {
    if (vocab_size == 0) throw InputError("model config: vocab_size must be positive");
    if (embed_dim == 0) throw InputError("model config: embed_dim must be positive");
    if (units == 0) throw InputError("model config: units must be positive");
    if (encoder_depth == 0) throw InputError("model config: encoder_depth must be at least 1");
    if (max_len < 2) throw InputError("model config: max_len must be at least 2");
}

namespace {

template <class Params, class Fn>
void visit_params(Params& p, Fn&& fn) {
    fn("encoder_embedding", p.encoder_embedding);
    for (size_t l = 0; l < p.encoder_lstm.size(); ++l) {
        std::string base = "encoder_lstm_" + std::to_string(l);
        fn(base + "_wx", p.encoder_lstm[l].wx);
        fn(base + "_wh", p.encoder_lstm[l].wh);
        fn(base + "_b", p.encoder_lstm[l].b);
    }
    fn("decoder_embedding", p.decoder_embedding);
    fn("decoder_lstm_wx", p.decoder_lstm.wx);
    fn("decoder_lstm_wh", p.decoder_lstm.wh);
    fn("decoder_lstm_b", p.decoder_lstm.b);
    fn("attention_w_enc", p.attn_w_enc);
    fn("attention_w_dec", p.attn_w_dec);
    fn("attention_v", p.attn_v);
    fn("output_w", p.out_w);
    fn("output_b", p.out_b);
}

bool is_bias_name(const std::string& name) {
    return name.size() >= 2 && name.compare(name.size() - 2, 2, "_b") == 0;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = x . w for a single row vector; w is [k,n].
Tensor vecmat(const Tensor& x, const Tensor& w, const char* who) {
    if (w.rank() != 2 || x.numel() != w.rows())
        throw InputError(std::string(who) + ": cannot multiply " + x.shape_str() + " by " +
                         w.shape_str());
    Tensor y({w.cols()});
    for (size_t k = 0; k < w.rows(); ++k) {
        double xv = x[k];
        if (xv == 0.0) continue;
        const double* row = w.data() + k * w.cols();
        for (size_t j = 0; j < w.cols(); ++j) y[j] += xv * row[j];
    }
    return y;
}

void check_id(int id, size_t vocab, const char* who) {
    if (id < 0 || static_cast<size_t>(id) >= vocab)
        throw InputError(std::string(who) + ": id " + std::to_string(id) +
                         " out of range for vocabulary of size " + std::to_string(vocab));
}

void check_batch(const std::vector<std::vector<int>>& rows, const ModelConfig& cfg,
                 const char* who) {
    if (rows.empty()) throw InputError(std::string(who) + ": empty batch");
    for (const auto& row : rows) {
        if (row.size() != cfg.max_len)
            throw InputError(std::string(who) + ": row length " + std::to_string(row.size()) +
                             " differs from max_len " + std::to_string(cfg.max_len));
        for (int id : row) check_id(id, cfg.vocab_size, who);
    }
}

std::vector<size_t> column_ids(const std::vector<std::vector<int>>& rows, size_t t) {
    std::vector<size_t> out(rows.size());
    for (size_t b = 0; b < rows.size(); ++b) out[b] = static_cast<size_t>(rows[b][t]);
    return out;
}

} // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
    config.validate();
    const size_t v = config.vocab_size, e = config.embed_dim, u = config.units;
    ModelParams p;
    p.config = config;
    p.encoder_embedding = Tensor({v, e});
    for (size_t l = 0; l < config.encoder_depth; ++l) {
        size_t in_dim = (l == 0) ? e : u;
        p.encoder_lstm.push_back({Tensor({in_dim, 4 * u}), Tensor({u, 4 * u}), Tensor({4 * u})});
    }
    p.decoder_embedding = Tensor({v, e});
    p.decoder_lstm = {Tensor({e, 4 * u}), Tensor({u, 4 * u}), Tensor({4 * u})};
    p.attn_w_enc = Tensor({u, u});
    p.attn_w_dec = Tensor({u, u});
    p.attn_v = Tensor({u});
    p.out_w = Tensor({2 * u, v});
    p.out_b = Tensor({v});
    return p;
}

ModelParams ModelParams::init(const ModelConfig& config, uint64_t seed) {
    ModelParams p = zeros(config);
    Rng rng(seed);
    // Draw order follows for_each order, so initialization is reproducible.
    p.for_each([&](const std::string& name, Tensor& t) {
        if (is_bias_name(name)) return;
        t = Tensor::uniform(t.shape(), -0.08, 0.08, rng);
    });
    return p;
}

size_t ModelParams::param_count() const {
    size_t n = 0;
    for_each([&](const std::string&, const Tensor& t) { n += t.numel(); });
    return n;
}

void ModelParams::for_each(const std::function<void(const std::string&, Tensor&)>& fn) {
    visit_params(*this, fn);
}

void ModelParams::for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const {
    visit_params(*this, fn);
}

void lstm_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
               const LstmWeights& w, Tensor& h_out, Tensor& c_out) {
    if (w.wh.rank() != 2) throw InputError("lstm_step: recurrent kernel must be rank 2");
    const size_t units = w.wh.rows();
    if (w.wx.rank() != 2 || w.wx.cols() != 4 * units || w.wh.cols() != 4 * units ||
        w.b.numel() != 4 * units)
        throw InputError("lstm_step: weight shapes disagree: wx " + w.wx.shape_str() + ", wh " +
                         w.wh.shape_str() + ", b " + w.b.shape_str());
    if (x.numel() != w.wx.rows())
        throw InputError("lstm_step: input " + x.shape_str() + " does not match kernel " +
                         w.wx.shape_str());
    if (h_prev.numel() != units || c_prev.numel() != units)
        throw InputError("lstm_step: state size does not match " + std::to_string(units) +
                         " units");

    Tensor z = vecmat(x, w.wx, "lstm_step");
    Tensor zh = vecmat(h_prev, w.wh, "lstm_step");
    for (size_t j = 0; j < 4 * units; ++j) z[j] += zh[j] + w.b[j];

    // Computed into fresh buffers so callers may alias outputs with inputs.
    Tensor h_new({units}), c_new({units});
    for (size_t u = 0; u < units; ++u) {
        double i = sigmoid(z[u]);
        double f = sigmoid(z[units + u]);
        double g = std::tanh(z[2 * units + u]);
        double o = sigmoid(z[3 * units + u]);
        double cell = f * c_prev[u] + i * g;
        c_new[u] = cell;
        h_new[u] = o * std::tanh(cell);
    }
    h_out = std::move(h_new);
    c_out = std::move(c_new);
}

double attention_score(const Tensor& s, const Tensor& h_i, const ModelParams& params) {
    Tensor a = vecmat(s, params.attn_w_dec, "attention_score");
    Tensor b = vecmat(h_i, params.attn_w_enc, "attention_score");
    double e = 0.0;
    for (size_t j = 0; j < a.numel(); ++j) e += params.attn_v[j] * std::tanh(a[j] + b[j]);
    return e;
}

Tensor attention_weights(const std::vector<double>& scores, const std::vector<uint8_t>& valid) {
    if (scores.size() != valid.size())
        throw InputError("attention_weights: scores and validity mask lengths differ");
    if (scores.empty()) throw InputError("attention_weights: no encoder steps");
    double mx = 0.0;
    bool any = false;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!valid[i]) continue;
        mx = any ? std::max(mx, scores[i]) : scores[i];
        any = true;
    }
    if (!any) throw InputError("attention_weights: no valid encoder steps");
    Tensor w({scores.size()});
    double sum = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!valid[i]) continue; // pad positions stay exactly 0
        w[i] = std::exp(scores[i] - mx);
        sum += w[i];
    }
    for (size_t i = 0; i < scores.size(); ++i)
        if (valid[i]) w[i] /= sum;
    return w;
}

Tensor context_vector(const Tensor& weights, const std::vector<Tensor>& enc_outputs) {
    if (weights.numel() != enc_outputs.size())
        throw InputError("context_vector: " + std::to_string(weights.numel()) +
                         " weights for " + std::to_string(enc_outputs.size()) + " encoder steps");
    if (enc_outputs.empty()) throw InputError("context_vector: no encoder steps");
    const size_t units = enc_outputs[0].numel();
    Tensor c({units});
    for (size_t t = 0; t < enc_outputs.size(); ++t) {
        double w = weights[t];
        if (w == 0.0) continue;
        for (size_t u = 0; u < units; ++u) c[u] += w * enc_outputs[t][u];
    }
    return c;
}

SentenceEncoding encode_sentence(const std::vector<int>& ids, const ModelParams& params) {
    if (ids.empty()) throw InputError("encode: empty id sequence");
    const size_t e = params.config.embed_dim, u = params.config.units;
    for (int id : ids) check_id(id, params.config.vocab_size, "encode");

    const size_t depth = params.encoder_lstm.size();
    std::vector<Tensor> h(depth, Tensor({u})), c(depth, Tensor({u}));
    SentenceEncoding enc;
    enc.valid.resize(ids.size());
    for (size_t t = 0; t < ids.size(); ++t) {
        enc.valid[t] = ids[t] != 0 ? 1 : 0;
        Tensor x({e});
        const double* row = params.encoder_embedding.data() + static_cast<size_t>(ids[t]) * e;
        std::copy(row, row + e, x.data());
        for (size_t l = 0; l < depth; ++l) {
            lstm_step(x, h[l], c[l], params.encoder_lstm[l], h[l], c[l]);
            x = h[l];
        }
        enc.outputs.push_back(h[depth - 1]);
    }
    enc.final_h = h[depth - 1];
    enc.final_c = c[depth - 1];
    return enc;
}

EncodeResult encode(const std::vector<std::vector<int>>& input_ids, const ModelParams& params) {
    check_batch(input_ids, params.config, "encode");
    const size_t b = input_ids.size(), t = params.config.max_len, u = params.config.units;
    EncodeResult r{Tensor({b, t, u}), Tensor({b, u}), Tensor({b, u})};
    for (size_t i = 0; i < b; ++i) {
        SentenceEncoding enc = encode_sentence(input_ids[i], params);
        for (size_t s = 0; s < t; ++s)
            std::copy(enc.outputs[s].data(), enc.outputs[s].data() + u,
                      r.outputs.data() + (i * t + s) * u);
        std::copy(enc.final_h.data(), enc.final_h.data() + u, r.final_h.data() + i * u);
        std::copy(enc.final_c.data(), enc.final_c.data() + u, r.final_c.data() + i * u);
    }
    return r;
}

DecoderStepResult decoder_step(int y_prev_id, const Tensor& dec_h, const Tensor& dec_c,
                               const SentenceEncoding& enc, const ModelParams& params) {
    check_id(y_prev_id, params.config.vocab_size, "decoder_step");
    if (enc.outputs.empty()) throw InputError("decoder_step: empty encoding");
    const size_t e = params.config.embed_dim, u = params.config.units;

    Tensor x({e});
    const double* row = params.decoder_embedding.data() + static_cast<size_t>(y_prev_id) * e;
    std::copy(row, row + e, x.data());

    DecoderStepResult r;
    lstm_step(x, dec_h, dec_c, params.decoder_lstm, r.h, r.c);

    // Attention queries the hidden state the step just produced.
    std::vector<double> scores(enc.outputs.size());
    for (size_t t = 0; t < enc.outputs.size(); ++t)
        scores[t] = attention_score(r.h, enc.outputs[t], params);
    r.weights = attention_weights(scores, enc.valid);
    Tensor ctx = context_vector(r.weights, enc.outputs);

    Tensor comb({2 * u});
    std::copy(r.h.data(), r.h.data() + u, comb.data());
    std::copy(ctx.data(), ctx.data() + u, comb.data() + u);
    r.logits = vecmat(comb, params.out_w, "decoder_step");
    for (size_t j = 0; j < r.logits.numel(); ++j) r.logits[j] += params.out_b[j];
    return r;
}

Tensor AttentionTrace::matrix(size_t example) const {
    if (steps.empty()) throw InputError("attention trace: no decoder steps recorded");
    const size_t b = steps[0].rows(), t = steps[0].cols();
    if (example >= b)
        throw InputError("attention trace: example " + std::to_string(example) +
                         " out of range for batch of " + std::to_string(b));
    Tensor m({steps.size(), t});
    for (size_t s = 0; s < steps.size(); ++s)
        for (size_t i = 0; i < t; ++i) m.at(s, i) = steps[s].at(example, i);
    return m;
}

namespace {

struct CellVars {
    Var wx, wh, b;
};

Var lstm_cell(Tape& t, Var x, Var h_prev, Var c_prev, const CellVars& w, size_t units,
              Var& c_out) {
    Var z = t.add_row_bias(t.add(t.matmul(x, w.wx), t.matmul(h_prev, w.wh)), w.b);
    Var i = t.sigmoid(t.slice_cols(z, 0, units));
    Var f = t.sigmoid(t.slice_cols(z, units, units));
    Var g = t.tanh(t.slice_cols(z, 2 * units, units));
    Var o = t.sigmoid(t.slice_cols(z, 3 * units, units));
    c_out = t.add(t.mul(f, c_prev), t.mul(i, g));
    return t.mul(o, t.tanh(c_out));
}

struct GraphBuild {
    Tape tape;
    std::vector<std::pair<std::string, Var>> params; // for_each order
    Var loss;
    AttentionTrace trace;
};

void build_forward(GraphBuild& gb, const ModelParams& p,
                   const std::vector<std::vector<int>>& inputs,
                   const std::vector<std::vector<int>>& targets) {
    const ModelConfig& cfg = p.config;
    cfg.validate();
    check_batch(inputs, cfg, "forward_teacher_forced inputs");
    check_batch(targets, cfg, "forward_teacher_forced targets");
    if (inputs.size() != targets.size())
        throw InputError("forward_teacher_forced: input batch " + std::to_string(inputs.size()) +
                         " vs target batch " + std::to_string(targets.size()));
    const size_t b = inputs.size(), max_len = cfg.max_len, u = cfg.units;

    Tape& t = gb.tape;
    std::unordered_map<std::string, Var> pv;
    p.for_each([&](const std::string& name, const Tensor& w) {
        Var v = t.param(w);
        pv[name] = v;
        gb.params.emplace_back(name, v);
    });
    auto layer_vars = [&](const std::string& base) {
        return CellVars{pv.at(base + "_wx"), pv.at(base + "_wh"), pv.at(base + "_b")};
    };

    // encoder scan, layers cascaded within each timestep
    std::vector<Var> h(cfg.encoder_depth), c(cfg.encoder_depth);
    for (size_t l = 0; l < cfg.encoder_depth; ++l) {
        h[l] = t.input(Tensor({b, u}));
        c[l] = t.input(Tensor({b, u}));
    }
    std::vector<Var> enc_outs;
    for (size_t s = 0; s < max_len; ++s) {
        Var x = t.gather_rows(pv.at("encoder_embedding"), column_ids(inputs, s));
        for (size_t l = 0; l < cfg.encoder_depth; ++l) {
            CellVars w = layer_vars("encoder_lstm_" + std::to_string(l));
            Var c_new;
            Var h_new = lstm_cell(t, x, h[l], c[l], w, u, c_new);
            h[l] = h_new;
            c[l] = c_new;
            x = h[l];
        }
        enc_outs.push_back(h.back());
    }

    Tensor attn_mask({b, max_len});
    for (size_t i = 0; i < b; ++i)
        for (size_t s = 0; s < max_len; ++s) attn_mask.at(i, s) = inputs[i][s] != 0 ? 1.0 : 0.0;

    std::vector<Var> keys(max_len);
    for (size_t s = 0; s < max_len; ++s) keys[s] = t.matmul(enc_outs[s], pv.at("attention_w_enc"));
    Var v_col = t.reshape(pv.at("attention_v"), {u, 1});
    CellVars dec_w = layer_vars("decoder_lstm");

    Var dec_h = h.back(), dec_c = c.back();
    const size_t steps = max_len - 1;
    std::vector<Var> step_logits;
    for (size_t s = 0; s < steps; ++s) {
        Var x = t.gather_rows(pv.at("decoder_embedding"), column_ids(targets, s));
        Var c_new;
        Var h_new = lstm_cell(t, x, dec_h, dec_c, dec_w, u, c_new);
        dec_h = h_new;
        dec_c = c_new;

        Var q = t.matmul(dec_h, pv.at("attention_w_dec"));
        Var scores;
        for (size_t k = 0; k < max_len; ++k) {
            Var e = t.matmul(t.tanh(t.add(q, keys[k])), v_col);
            scores = (k == 0) ? e : t.concat_cols(scores, e);
        }
        Var weights = t.masked_softmax_rows(scores, attn_mask);
        gb.trace.steps.push_back(t.value(weights));

        Var ctx;
        for (size_t k = 0; k < max_len; ++k) {
            Var term = t.scale_rows(enc_outs[k], t.slice_cols(weights, k, 1));
            ctx = (k == 0) ? term : t.add(ctx, term);
        }
        Var comb = t.concat_cols(dec_h, ctx);
        step_logits.push_back(t.add_row_bias(t.matmul(comb, pv.at("output_w")), pv.at("output_b")));
    }

    Var logits = t.stack_steps(step_logits);
    Tensor loss_targets({b, steps}), loss_mask({b, steps});
    for (size_t i = 0; i < b; ++i) {
        for (size_t s = 0; s < steps; ++s) {
            int tgt = targets[i][s + 1];
            loss_targets.at(i, s) = static_cast<double>(tgt);
            loss_mask.at(i, s) = tgt != 0 ? 1.0 : 0.0;
        }
    }
    gb.loss = t.masked_sparse_crossentropy(logits, loss_targets, loss_mask);
}

} // namespace

ForwardResult forward_teacher_forced(const std::vector<std::vector<int>>& input_ids,
                                     const std::vector<std::vector<int>>& target_ids,
                                     const ModelParams& params) {
    GraphBuild gb;
    build_forward(gb, params, input_ids, target_ids);
    ForwardResult r;
    r.loss = gb.tape.value(gb.loss).item();
    r.trace = std::move(gb.trace);
    return r;
}

GradResult loss_and_gradients(const std::vector<std::vector<int>>& input_ids,
                              const std::vector<std::vector<int>>& target_ids,
                              const ModelParams& params) {
    GraphBuild gb;
    build_forward(gb, params, input_ids, target_ids);
    gb.tape.backward(gb.loss);
    GradResult r;
    r.loss = gb.tape.value(gb.loss).item();
    for (const auto& [name, v] : gb.params) {
        r.names.push_back(name);
        r.grads.push_back(gb.tape.grad(v));
    }
    r.trace = std::move(gb.trace);
    return r;
}

} // namespace azsc
