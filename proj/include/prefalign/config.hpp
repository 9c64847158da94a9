#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prefalign/prefdata.hpp"
#include "prefalign/trainer.hpp"
#include "prefalign/world.hpp"

namespace prefalign {

struct MiningConfig {
  std::size_t k = 3;
  std::string captions;  ///< optional multi-caption JSONL path
  std::string caption_policy = "first";
  std::size_t caption_pool = 0;
  std::uint64_t caption_seed = 0;
};

struct JudgeConfig {
  double sharpness = 25.0;
  double margin0 = 0.9;
  std::string cache = "score-cache.jsonl";  ///< relative to the run directory
};

struct LossSection {
  double lambda = 0.6;
  TrainVariant variant = TrainVariant::listwise;
  bool expanded_negatives = false;
};

struct TrainSection {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double scale_lr_multiplier = 100.0;
  std::uint64_t seed = 0;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 0;
};

struct EvalSection {
  std::vector<std::size_t> ks = {1, 5};
  std::size_t n_instances = 128;
  std::string benchmark = "instances.jsonl";  ///< relative to the run directory
  std::uint64_t seed = 0;
};

/// The whole experiment as one document. Parsing is strict: any key the
/// schema does not define is rejected with its full path in the message.
struct ExperimentConfig {
  WorldConfig world;
  DedupConfig dedup{/*n_clusters=*/8, /*epsilon=*/0.02, /*seed=*/0};
  MiningConfig mining;
  JudgeConfig judge;
  LossSection loss;
  TrainSection train;
  EvalSection eval;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Merge the train and loss sections into the trainer's config.
TrainConfig assemble_train_config(const ExperimentConfig& cfg);

/// Canonical serialization (sorted keys); hashing this identifies the config.
std::string config_to_json(const ExperimentConfig& cfg);

/// Point every seeded stage at one seed (the --seed override).
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

void validate(const ExperimentConfig& cfg);

}  // namespace prefalign
