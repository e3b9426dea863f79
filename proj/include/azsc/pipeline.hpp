#pragma once

#include "azsc/adam.hpp"
#include "azsc/corruptor.hpp"
#include "azsc/seq2seq.hpp"
#include "azsc/textcodec.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace azsc {

struct TrainConfig {
    size_t batch_size = 40;
    size_t epochs = 10;
    uint64_t seed = 0;
    bool shuffle = true;
    double holdout = 0.0; // fraction of pairs reserved for loss reporting
    AdamConfig adam;

    void validate() const;
};

struct Batch {
    std::vector<std::vector<int>> inputs;  // encoded wrong sentences
    std::vector<std::vector<int>> targets; // encoded correct sentences

    size_t size() const { return inputs.size(); }
};

/// Encodes and batches the pairs. Shuffled with the config seed when
/// enabled; the final short batch is kept.
std::vector<Batch> make_batches(const std::vector<SentencePair>& pairs, const Vocab& vocab,
                                size_t max_len, const TrainConfig& config);

struct ModelCheckpoint {
    Vocab vocab;
    ModelParams params; // params.config carries the ModelConfig
};

struct TrainResult {
    ModelCheckpoint checkpoint;
    std::vector<double> epoch_losses;   // mean train loss per epoch
    std::vector<double> holdout_losses; // empty when holdout == 0
};

/// Called after every epoch: (1-based epoch, train loss, holdout loss).
/// Holdout loss is NaN when no holdout was requested.
using EpochHook = std::function<void(size_t, double, double)>;

/// Builds the vocabulary from the pairs (model_config.vocab_size is set from
/// it), then runs epochs of teacher-forced Adam updates with a per-epoch
/// batch reshuffle.
TrainResult train(const std::vector<SentencePair>& pairs, const TrainConfig& config,
                  ModelConfig model_config, const EpochHook& hook = {});

/// Encode, then argmax-decode one step at a time (ties take the lowest id)
/// until the end marker or the max_len step budget. The start marker spends
/// one step, so the output never exceeds max_len - 1 characters.
std::u32string greedy_decode(std::u32string_view sentence, const ModelCheckpoint& checkpoint);

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

/// In-memory forms of the checkpoint file format.
std::string serialize_checkpoint(const ModelCheckpoint& checkpoint);
ModelCheckpoint parse_checkpoint(std::string_view bytes, const std::string& what = "checkpoint");

} // namespace azsc
