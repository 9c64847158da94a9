#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prefalign/embed.hpp"
#include "prefalign/losses.hpp"
#include "prefalign/prefdata.hpp"

namespace prefalign {

struct EncoderDims {
  std::size_t raw_dim = 32;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 0;  ///< 0 selects the linear encoder
};

/// One modality's map: linear (w1 only, plus b1) or one hidden tanh layer
/// (w1/b1 into the hidden, w2/b2 out). Matrices are flat row-major.
struct ModalityEncoder {
  std::vector<double> w1, b1;
  std::vector<double> w2, b2;
};

struct EncoderState {
  EncoderDims dims;
  ModalityEncoder text;
  ModalityEncoder image;
  double log_tau = 0.0;
  double log_beta = 0.0;

  double tau() const;
  double beta() const;
};

enum class TrainVariant { pairwise, listwise, contrast_pref, none };

const char* to_string(TrainVariant v);
TrainVariant train_variant_from_string(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double scale_lr_multiplier = 100.0;
  double lambda = 0.5;
  TrainVariant variant = TrainVariant::listwise;
  bool expanded_negatives = false;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

/// Everything a training run reads: raw views, prebuilt candidate sets, and
/// cached judge alignment scores keyed by (anchor item, candidate item).
struct TrainData {
  EmbeddingBatch raw_text;
  EmbeddingBatch raw_image;
  std::vector<AnchorCandidates> anchors;
  std::map<std::pair<std::string, std::string>, double> scores;
};

struct StepMetrics {
  std::size_t step = 0;
  double loss_total = 0.0;
  double loss_rpa = 0.0;
  double loss_contrast = 0.0;
  double tau = 0.0;  ///< value used for this step's loss
  double beta = 0.0;
};

struct TrainResult {
  EncoderState state;
  std::vector<StepMetrics> log;
  /// checkpoints[e] is the state after e full epochs; [0] is the initial state.
  std::vector<EncoderState> checkpoints;
};

/// Seeded small-magnitude init; log_tau = ln 0.07 and log_beta = ln(1/0.07)
/// so the scales start at the configured defaults exactly.
EncoderState init_encoders(const EncoderDims& dims, std::uint64_t seed);

/// Modality-specific map, then L2 normalization.
EmbeddingVec encode(const EncoderState& state, const EmbeddingVec& raw);

EmbeddingBatch encode_batch(const EncoderState& state, const EmbeddingBatch& raw);

/// One gradient-descent step over the given anchor subset (indices into
/// data.anchors). Scale parameters step with learning_rate *
/// scale_lr_multiplier in log space.
std::pair<EncoderState, StepMetrics> train_step(const EncoderState& state, const TrainData& data,
                                                const std::vector<std::size_t>& batch,
                                                const TrainConfig& cfg);

TrainResult train(const TrainData& data, const EncoderDims& dims, const TrainConfig& cfg);

/// Versioned JSON dump of an EncoderState; round-trips exactly.
std::string state_to_json(const EncoderState& state);
EncoderState state_from_json(const std::string& text);

}  // namespace prefalign
