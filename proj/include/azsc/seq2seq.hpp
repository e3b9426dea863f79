#pragma once

#include "azsc/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace azsc {

struct ModelConfig {
    size_t vocab_size = 0;
    size_t embed_dim = 500;
    size_t units = 500;
    size_t encoder_depth = 3;
    size_t max_len = 20;

    void validate() const;
};

/// Fused-kernel LSTM weights, gate column order (i, f, c, o).
struct LstmWeights {
    Tensor wx; // [in_dim, 4*units]
    Tensor wh; // [units, 4*units]
    Tensor b;  // [4*units]
};

struct ModelParams {
    ModelConfig config;
    Tensor encoder_embedding; // [vocab, embed]
    std::vector<LstmWeights> encoder_lstm; // config.encoder_depth layers
    Tensor decoder_embedding; // [vocab, embed]
    LstmWeights decoder_lstm;
    Tensor attn_w_enc; // [units, units]
    Tensor attn_w_dec; // [units, units]
    Tensor attn_v;     // [units]
    Tensor out_w;      // [2*units, vocab]
    Tensor out_b;      // [vocab]

    /// Kernels uniform(-0.08, 0.08), biases zero, seeded.
    static ModelParams init(const ModelConfig& config, uint64_t seed);
    static ModelParams zeros(const ModelConfig& config);

    size_t param_count() const;

    /// Visits every tensor in a fixed order under a stable name. The order
    /// defines gradient alignment and checkpoint layout.
    void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
    void for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

// ---- single-example inference path (plain tensor math, no tape) ----

/// One LSTM cell update. x [in_dim], h_prev/c_prev [units].
void lstm_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
               const LstmWeights& w, Tensor& h_out, Tensor& c_out);

/// Additive attention energy: v . tanh(W_dec*s + W_enc*h_i).
double attention_score(const Tensor& s, const Tensor& h_i, const ModelParams& params);

/// Softmax over positions where valid is nonzero; invalid positions are
/// exactly 0. Needs at least one valid step.
Tensor attention_weights(const std::vector<double>& scores, const std::vector<uint8_t>& valid);

/// C = sum_i weights[i] * enc_outputs[i].
Tensor context_vector(const Tensor& weights, const std::vector<Tensor>& enc_outputs);

struct SentenceEncoding {
    std::vector<Tensor> outputs; // top layer h per step, each [units]
    Tensor final_h;              // [units]
    Tensor final_c;              // [units]
    std::vector<uint8_t> valid;  // 1 where the input id is not padding
};

/// Embeds and runs the stacked encoder over one padded id sequence.
SentenceEncoding encode_sentence(const std::vector<int>& ids, const ModelParams& params);

struct EncodeResult {
    Tensor outputs; // [batch, max_len, units]
    Tensor final_h; // [batch, units]
    Tensor final_c; // [batch, units]
};

/// Batched encoder view; rows are encoded independently.
EncodeResult encode(const std::vector<std::vector<int>>& input_ids, const ModelParams& params);

struct DecoderStepResult {
    Tensor logits;  // [vocab]
    Tensor h, c;    // [units]
    Tensor weights; // [encoder_steps]
};

/// Embed y_prev, advance the decoder LSTM, attend with the new hidden state,
/// project concat(hidden, context) to vocabulary logits.
DecoderStepResult decoder_step(int y_prev_id, const Tensor& dec_h, const Tensor& dec_c,
                               const SentenceEncoding& enc, const ModelParams& params);

// ---- batched training path (tape-backed) ----

struct AttentionTrace {
    std::vector<Tensor> steps; // per decoder step, [batch, encoder_steps]

    /// [decoder_steps, encoder_steps] slice for one batch row.
    Tensor matrix(size_t example) const;
};

struct ForwardResult {
    double loss = 0.0;
    AttentionTrace trace;
};

/// Teacher forcing: the decoder consumes target_ids as written (they begin
/// with the start marker) and is scored against target_ids shifted one step
/// left, with pad positions masked out of the loss.
ForwardResult forward_teacher_forced(const std::vector<std::vector<int>>& input_ids,
                                     const std::vector<std::vector<int>>& target_ids,
                                     const ModelParams& params);

struct GradResult {
    double loss = 0.0;
    std::vector<std::string> names;
    std::vector<Tensor> grads; // aligned with ModelParams::for_each order
    AttentionTrace trace;
};

GradResult loss_and_gradients(const std::vector<std::vector<int>>& input_ids,
                              const std::vector<std::vector<int>>& target_ids,
                              const ModelParams& params);

} // namespace azsc
