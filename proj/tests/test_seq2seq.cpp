#include "azsc/errors.hpp"
#include "azsc/rng.hpp"
#include "azsc/seq2seq.hpp"
#include "azsc/tensor.hpp"

#include "doctest.h"
#include "testutil.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

using namespace azsc;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.vocab_size = 7;
    cfg.embed_dim = 4;
    cfg.units = 4;
    cfg.encoder_depth = 2;
    cfg.max_len = 4;
    return cfg;
}

double pure_teacher_forced_loss(const std::vector<int>& input, const std::vector<int>& target,
                                const ModelParams& params) {
    SentenceEncoding enc = encode_sentence(input, params);
    Tensor h = enc.final_h, c = enc.final_c;
    double total = 0.0;
    size_t n = 0;
    for (size_t s = 0; s + 1 < params.config.max_len; ++s) {
        DecoderStepResult step = decoder_step(target[s], h, c, enc, params);
        h = step.h;
        c = step.c;
        const int want = target[s + 1];
        if (want == 0) continue;
        double mx = step.logits[0];
        for (size_t j = 1; j < step.logits.numel(); ++j) mx = std::max(mx, step.logits[j]);
        double z = 0.0;
        for (size_t j = 0; j < step.logits.numel(); ++j) z += std::exp(step.logits[j] - mx);
        total += -(step.logits[static_cast<size_t>(want)] - mx - std::log(z));
        ++n;
    }
    return total / static_cast<double>(n);
}

} // namespace

TEST_CASE("parameter count matches the reference architecture exactly") {
    ModelConfig cfg;
    cfg.vocab_size = 99;
    cfg.embed_dim = 500;
    cfg.units = 500;
    cfg.encoder_depth = 3;
    cfg.max_len = 20;
    ModelParams p = ModelParams::zeros(cfg);

    CHECK(p.param_count() == 8706599);

    std::map<std::string, size_t> sizes;
    p.for_each([&](const std::string& name, const Tensor& t) { sizes[name] = t.numel(); });

    CHECK(sizes.at("encoder_embedding") == 49500);
    CHECK(sizes.at("decoder_embedding") == 49500);
    for (const std::string& base :
         {std::string("encoder_lstm_0"), std::string("encoder_lstm_1"),
          std::string("encoder_lstm_2"), std::string("decoder_lstm")}) {
        const size_t lstm = sizes.at(base + "_wx") + sizes.at(base + "_wh") + sizes.at(base + "_b");
        CHECK(lstm == 2002000);
    }
    const size_t attn =
        sizes.at("attention_w_enc") + sizes.at("attention_w_dec") + sizes.at("attention_v");
    CHECK(attn == 500500);
    CHECK(sizes.at("output_w") + sizes.at("output_b") == 99099);
    CHECK(sizes.size() == 19); // 2 embeddings + 4 lstms x3 + 3 attention + 2 output
}

TEST_CASE("config validation rejects degenerate dimensions") {
    ModelConfig cfg = tiny_config();
    cfg.vocab_size = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), "model config: vocab_size must be positive", InputError);
    cfg = tiny_config();
    cfg.max_len = 1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = tiny_config();
    cfg.encoder_depth = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("init zeroes biases and bounds kernels") {
    ModelParams p = ModelParams::init(tiny_config(), 17);
    p.for_each([&](const std::string& name, const Tensor& t) {
        const bool is_bias = name.size() >= 2 && name.compare(name.size() - 2, 2, "_b") == 0;
        for (size_t i = 0; i < t.numel(); ++i) {
            if (is_bias) {
                CHECK(t[i] == 0.0);
            } else {
                CHECK(t[i] >= -0.08);
                CHECK(t[i] < 0.08);
            }
        }
    });

    ModelParams q = ModelParams::init(tiny_config(), 17);
    ModelParams r = ModelParams::init(tiny_config(), 18);
    bool same_seed_equal = true, diff_seed_equal = true;
    p.for_each([&](const std::string& name, const Tensor& t) {
        q.for_each([&](const std::string& qn, const Tensor& qt) {
            if (qn != name) return;
            for (size_t i = 0; i < t.numel(); ++i) same_seed_equal &= t[i] == qt[i];
        });
        r.for_each([&](const std::string& rn, const Tensor& rt) {
            if (rn != name) return;
            for (size_t i = 0; i < t.numel(); ++i) diff_seed_equal &= t[i] == rt[i];
        });
    });
    CHECK(same_seed_equal);
    CHECK_FALSE(diff_seed_equal);
}

TEST_CASE("lstm_step with zero weights halves the cell state") {
    // all-zero pre-activations: i = f = o = 0.5, g = 0
    LstmWeights w{Tensor({2, 12}), Tensor({3, 12}), Tensor({12})};
    Tensor x({2}, {0.3, -0.7});
    Tensor h_prev({3}), c_prev = Tensor::full({3}, 1.0);
    Tensor h, c;
    lstm_step(x, h_prev, c_prev, w, h, c);
    for (size_t u = 0; u < 3; ++u) {
        CHECK(c[u] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(h[u] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
    }
}

TEST_CASE("lstm_step matches a scalar-arithmetic oracle") {
    const size_t in = 2, units = 2;
    Rng rng(91);
    LstmWeights w{Tensor::uniform({in, 4 * units}, -0.9, 0.9, rng),
                  Tensor::uniform({units, 4 * units}, -0.9, 0.9, rng),
                  Tensor::uniform({4 * units}, -0.5, 0.5, rng)};
    Tensor x = Tensor::uniform({in}, -1, 1, rng);
    Tensor h_prev = Tensor::uniform({units}, -1, 1, rng);
    Tensor c_prev = Tensor::uniform({units}, -1, 1, rng);

    Tensor h, c;
    lstm_step(x, h_prev, c_prev, w, h, c);

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    for (size_t u = 0; u < units; ++u) {
        double z[4];
        for (int gate = 0; gate < 4; ++gate) {
            const size_t col = static_cast<size_t>(gate) * units + u;
            double acc = w.b[col];
            for (size_t k = 0; k < in; ++k) acc += x[k] * w.wx.at(k, col);
            for (size_t k = 0; k < units; ++k) acc += h_prev[k] * w.wh.at(k, col);
            z[gate] = acc;
        }
        const double ci = sig(z[0]) * std::tanh(z[2]) + sig(z[1]) * c_prev[u];
        CHECK(c[u] == doctest::Approx(ci).epsilon(1e-12));
        CHECK(h[u] == doctest::Approx(sig(z[3]) * std::tanh(ci)).epsilon(1e-12));
    }
}

TEST_CASE("lstm_step supports aliased state buffers") {
    Rng rng(92);
    LstmWeights w{Tensor::uniform({3, 8}, -1, 1, rng), Tensor::uniform({2, 8}, -1, 1, rng),
                  Tensor::uniform({8}, -1, 1, rng)};
    Tensor x = Tensor::uniform({3}, -1, 1, rng);
    Tensor h = Tensor::uniform({2}, -1, 1, rng);
    Tensor c = Tensor::uniform({2}, -1, 1, rng);
    Tensor h2 = h, c2 = c, ho, co;
    lstm_step(x, h, c, w, h, c); // outputs alias the inputs
    lstm_step(x, h2, c2, w, ho, co);
    for (size_t u = 0; u < 2; ++u) {
        CHECK(h[u] == ho[u]);
        CHECK(c[u] == co[u]);
    }
}

TEST_CASE("lstm_step validates shapes") {
    LstmWeights w{Tensor({2, 12}), Tensor({3, 12}), Tensor({12})};
    Tensor h, c;
    CHECK_THROWS_AS(lstm_step(Tensor({5}), Tensor({3}), Tensor({3}), w, h, c), InputError);
    CHECK_THROWS_AS(lstm_step(Tensor({2}), Tensor({4}), Tensor({3}), w, h, c), InputError);
    LstmWeights bad{Tensor({2, 12}), Tensor({3, 8}), Tensor({12})};
    CHECK_THROWS_AS(lstm_step(Tensor({2}), Tensor({3}), Tensor({3}), bad, h, c), InputError);
}

TEST_CASE("attention score reduces to hand arithmetic in three dimensions") {
    ModelConfig cfg = tiny_config();
    cfg.units = 3;
    cfg.embed_dim = 3;
    ModelParams p = ModelParams::zeros(cfg);
    // identity maps make the energy v . tanh(s + h)
    for (size_t i = 0; i < 3; ++i) {
        p.attn_w_dec.at(i, i) = 1.0;
        p.attn_w_enc.at(i, i) = 1.0;
    }
    p.attn_v = Tensor({3}, {1.0, 0.0, -1.0});
    Tensor s({3}, {0.1, 0.2, 0.3});
    Tensor h({3}, {0.4, -0.2, 0.0});
    const double expect = std::tanh(0.5) - std::tanh(0.3);
    CHECK(attention_score(s, h, p) == doctest::Approx(expect).epsilon(1e-12));

    SUBCASE("zero v kills every score") {
        p.attn_v = Tensor({3});
        CHECK(attention_score(s, h, p) == 0.0);
    }
    SUBCASE("zero decoder map makes the score query-independent") {
        p.attn_w_dec = Tensor({3, 3});
        Tensor other({3}, {-5.0, 2.0, 9.0});
        CHECK(attention_score(s, h, p) == attention_score(other, h, p));
    }
}

TEST_CASE("attention weights form a masked probability vector") {
    Tensor w = attention_weights({0.0, 0.0}, {1, 1});
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));

    Tensor odds = attention_weights({std::log(2.0), 0.0}, {1, 1});
    CHECK(odds[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(odds[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Tensor masked = attention_weights({3.0, 100.0, 1.0}, {1, 0, 1});
    CHECK(masked[1] == 0.0); // exactly, not approximately
    CHECK(masked[0] + masked[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(masked[0] > masked[2]);

    CHECK_THROWS_WITH_AS(attention_weights({1.0, 2.0}, {0, 0}),
                         "attention_weights: no valid encoder steps", InputError);
    CHECK_THROWS_AS(attention_weights({}, {}), InputError);
    CHECK_THROWS_AS(attention_weights({1.0}, {1, 1}), InputError);
}

TEST_CASE("context vector is the weighted sum of encoder outputs") {
    std::vector<Tensor> outs{Tensor({2}, {1.0, 0.0}), Tensor({2}, {0.0, 1.0})};
    Tensor pick = context_vector(Tensor({2}, {1.0, 0.0}), outs);
    CHECK(pick[0] == 1.0);
    CHECK(pick[1] == 0.0);

    Tensor mix = context_vector(Tensor({2}, {0.5, 0.5}), outs);
    CHECK(mix[0] == 0.5);
    CHECK(mix[1] == 0.5);

    // naive-loop oracle on random data
    Rng rng(93);
    std::vector<Tensor> many;
    for (int i = 0; i < 5; ++i) many.push_back(Tensor::uniform({3}, -2, 2, rng));
    Tensor weights = Tensor::uniform({5}, 0, 1, rng);
    Tensor got = context_vector(weights, many);
    for (size_t u = 0; u < 3; ++u) {
        double want = 0.0;
        for (size_t t = 0; t < 5; ++t) want += weights[t] * many[t][u];
        CHECK(got[u] == doctest::Approx(want).epsilon(1e-12));
    }

    CHECK_THROWS_AS(context_vector(Tensor({3}, {1, 0, 0}), outs), InputError);
}

TEST_CASE("encode_sentence flags pads and matches a hand scan at depth 1") {
    ModelConfig cfg = tiny_config();
    cfg.encoder_depth = 1;
    ModelParams p = ModelParams::init(cfg, 7);
    const std::vector<int> ids{1, 3, 2, 0};

    SentenceEncoding enc = encode_sentence(ids, p);
    CHECK(enc.valid == std::vector<uint8_t>{1, 1, 1, 0});
    REQUIRE(enc.outputs.size() == 4);

    // replay the scan with bare lstm_step calls
    Tensor h({cfg.units}), c({cfg.units});
    for (size_t t = 0; t < ids.size(); ++t) {
        Tensor x({cfg.embed_dim});
        for (size_t j = 0; j < cfg.embed_dim; ++j)
            x[j] = p.encoder_embedding.at(static_cast<size_t>(ids[t]), j);
        lstm_step(x, h, c, p.encoder_lstm[0], h, c);
        for (size_t u = 0; u < cfg.units; ++u) CHECK(enc.outputs[t][u] == h[u]);
    }
    for (size_t u = 0; u < cfg.units; ++u) {
        CHECK(enc.final_h[u] == h[u]);
        CHECK(enc.final_c[u] == c[u]);
    }

    CHECK_THROWS_AS(encode_sentence({}, p), InputError);
    CHECK_THROWS_AS(encode_sentence({1, 99, 2, 0}, p), InputError);
}

TEST_CASE("stacking depth changes the encoding") {
    ModelConfig shallow = tiny_config();
    shallow.encoder_depth = 1;
    ModelConfig deep = tiny_config();
    deep.encoder_depth = 2;
    ModelParams a = ModelParams::init(shallow, 5);
    ModelParams b = ModelParams::init(deep, 5);
    SentenceEncoding ea = encode_sentence({1, 3, 2, 0}, a);
    SentenceEncoding eb = encode_sentence({1, 3, 2, 0}, b);
    bool differ = false;
    for (size_t u = 0; u < shallow.units; ++u) differ |= ea.final_h[u] != eb.final_h[u];
    CHECK(differ);
}

TEST_CASE("batched encode lays rows out independently") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::init(cfg, 8);
    const std::vector<std::vector<int>> batch{{1, 3, 2, 0}, {1, 4, 5, 2}, {1, 3, 2, 0}};
    EncodeResult r = encode(batch, p);
    CHECK(r.outputs.shape() == std::vector<size_t>{3, 4, 4});
    CHECK(r.final_h.shape() == std::vector<size_t>{3, 4});

    // identical rows produce identical encodings
    for (size_t i = 0; i < r.outputs.dim(1) * r.outputs.dim(2); ++i)
        CHECK(r.outputs[0 * 16 + i] == r.outputs[2 * 16 + i]);

    // and each row equals its single-sentence encoding
    SentenceEncoding one = encode_sentence(batch[1], p);
    for (size_t s = 0; s < 4; ++s)
        for (size_t u = 0; u < 4; ++u)
            CHECK(r.outputs[(1 * 4 + s) * 4 + u] == one.outputs[s][u]);

    CHECK_THROWS_AS(encode({{1, 2}}, p), InputError);          // wrong row length
    CHECK_THROWS_AS(encode({{1, 3, 2, 9}}, p), InputError);    // id out of range
    CHECK_THROWS_AS(encode({{1, 3, 2, -1}}, p), InputError);   // negative id
    CHECK_THROWS_AS(encode({}, p), InputError);                // empty batch
}

TEST_CASE("decoder_step at reference dimensions emits a full vocab row") {
    ModelConfig cfg;
    cfg.vocab_size = 99;
    cfg.embed_dim = 500;
    cfg.units = 500;
    cfg.encoder_depth = 3;
    cfg.max_len = 20;
    ModelParams p = ModelParams::init(cfg, 4);
    CHECK(p.out_w.rows() == 1000); // hidden and context concatenated

    std::vector<int> ids(cfg.max_len, 0);
    ids[0] = 1;
    ids[1] = 3;
    ids[2] = 2;
    SentenceEncoding enc = encode_sentence(ids, p);
    DecoderStepResult step = decoder_step(1, enc.final_h, enc.final_c, enc, p);
    CHECK(step.logits.numel() == 99);
    CHECK(step.logits.all_finite());
    CHECK(step.weights.numel() == 20);
    double sum = 0.0;
    for (size_t i = 0; i < 20; ++i) sum += step.weights[i];
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    for (size_t i = 3; i < 20; ++i) CHECK(step.weights[i] == 0.0); // pads
}

TEST_CASE("teacher-forced loss on a zero model is exactly ln vocab") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::zeros(cfg);
    ForwardResult r = forward_teacher_forced({{1, 3, 2, 0}}, {{1, 4, 2, 0}}, p);
    CHECK(r.loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("teacher-forced loss at init stays near ln vocab") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::init(cfg, 10);
    ForwardResult r = forward_teacher_forced({{1, 3, 2, 0}, {1, 5, 6, 2}},
                                             {{1, 4, 2, 0}, {1, 6, 5, 2}}, p);
    const double lnv = std::log(7.0);
    CHECK(r.loss > lnv * 0.85);
    CHECK(r.loss < lnv * 1.15);
}

TEST_CASE("loss is invariant under batch permutation") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::init(cfg, 11);
    const std::vector<std::vector<int>> in{{1, 3, 2, 0}, {1, 4, 5, 2}, {1, 6, 2, 0}};
    const std::vector<std::vector<int>> tg{{1, 5, 2, 0}, {1, 3, 3, 2}, {1, 4, 2, 0}};
    const double a = forward_teacher_forced(in, tg, p).loss;
    const double b =
        forward_teacher_forced({in[2], in[0], in[1]}, {tg[2], tg[0], tg[1]}, p).loss;
    CHECK(std::fabs(a - b) < 1e-12);
}

TEST_CASE("forward is deterministic") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::init(cfg, 12);
    const std::vector<std::vector<int>> in{{1, 3, 2, 0}};
    const std::vector<std::vector<int>> tg{{1, 4, 5, 2}};
    CHECK(forward_teacher_forced(in, tg, p).loss == forward_teacher_forced(in, tg, p).loss);
}

TEST_CASE("graph loss equals the pure single-example reconstruction") {
    // two code paths, one number: the tape graph and the plain tensor math
    ModelConfig cfg = tiny_config();
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        ModelParams p = ModelParams::init(cfg, seed);
        const std::vector<int> in{1, 3, 4, 2};
        const std::vector<int> tg{1, 5, 2, 0};
        const double graph = forward_teacher_forced({in}, {tg}, p).loss;
        const double pure = pure_teacher_forced_loss(in, tg, p);
        CHECK(testutil::rel_err(graph, pure, 1e-9) < 1e-10);
    }
}

TEST_CASE("attention trace rows are probability vectors over valid steps") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::init(cfg, 13);
    const std::vector<std::vector<int>> in{{1, 3, 2, 0}, {1, 4, 5, 2}};
    ForwardResult r = forward_teacher_forced(in, {{1, 4, 5, 2}, {1, 3, 2, 0}}, p);
    REQUIRE(r.trace.steps.size() == cfg.max_len - 1);

    Tensor m0 = r.trace.matrix(0);
    CHECK(m0.rows() == cfg.max_len - 1);
    CHECK(m0.cols() == cfg.max_len);
    for (size_t s = 0; s < m0.rows(); ++s) {
        double sum = 0.0;
        for (size_t k = 0; k < m0.cols(); ++k) sum += m0.at(s, k);
        CHECK(std::fabs(sum - 1.0) < 1e-9);
        CHECK(m0.at(s, 3) == 0.0); // row 0 has a pad at position 3
    }
    CHECK_THROWS_AS(r.trace.matrix(5), InputError);
    AttentionTrace empty;
    CHECK_THROWS_AS(empty.matrix(0), InputError);
}

TEST_CASE("forward validates batch shape") {
    ModelConfig cfg = tiny_config();
    ModelParams p = ModelParams::zeros(cfg);
    CHECK_THROWS_AS(forward_teacher_forced({{1, 3, 2, 0}}, {{1, 4, 2, 0}, {1, 5, 2, 0}}, p),
                    InputError);
    CHECK_THROWS_AS(forward_teacher_forced({{1, 3, 2}}, {{1, 4, 2, 0}}, p), InputError);
    CHECK_THROWS_AS(forward_teacher_forced({{1, 3, 2, 7}}, {{1, 4, 2, 0}}, p), InputError);
}

TEST_CASE("analytic gradients match central differences on the full model") {
    ModelConfig cfg = tiny_config(); // vocab 7, dims 4, depth 2
    ModelParams p = ModelParams::init(cfg, 14);
    const std::vector<std::vector<int>> in{{1, 3, 4, 2}, {1, 5, 2, 0}};
    const std::vector<std::vector<int>> tg{{1, 6, 2, 0}, {1, 3, 5, 2}};

    GradResult g = loss_and_gradients(in, tg, p);
    CHECK(g.loss == doctest::Approx(forward_teacher_forced(in, tg, p).loss));
    REQUIRE(g.names.size() == g.grads.size());

    size_t idx = 0;
    double worst = 0.0;
    p.for_each([&](const std::string& name, Tensor& t) {
        REQUIRE(g.names[idx] == name);
        REQUIRE(g.grads[idx].shape() == t.shape());
        const double h = 1e-5;
        for (size_t i = 0; i < t.numel(); ++i) {
            const double saved = t[i];
            t[i] = saved + h;
            const double up = forward_teacher_forced(in, tg, p).loss;
            t[i] = saved - h;
            const double down = forward_teacher_forced(in, tg, p).loss;
            t[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, testutil::rel_err(g.grads[idx][i], fd, 1e-3));
        }
        ++idx;
    });
    CHECK(idx == 16); // 2 embeddings, 3 lstms x3 tensors, 3 attention, 2 output
    CHECK(worst < 1e-4);
}
