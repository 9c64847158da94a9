#include "prefalign/config.hpp"

#include <set>

#include "json.hpp"
#include "prefalign/error.hpp"
#include "prefalign/io.hpp"

namespace prefalign {
namespace {

using nlohmann::json;

/// Strict view of one JSON object: every key must be consumed by a field()
/// call or done() rejects it with its full path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw Error(errc::config_invalid, "'" + path_ + "' must be an object");
  }

  template <typename T>
  T field(const char* key, T fallback) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return fallback;
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw Error(errc::config_invalid, "key '" + path_ + "." + key + "' has the wrong type");
    }
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key()))
        throw Error(errc::config_invalid, "unknown key '" + path_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const json* section(const json& root, const char* name) {
  auto it = root.find(name);
  return it == root.end() ? nullptr : &*it;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw Error(errc::config_invalid, "config is not a JSON object");

  static const std::set<std::string> known = {"world", "dedup",  "mining", "judge",
                                              "loss",  "train", "eval"};
  for (auto it = root.begin(); it != root.end(); ++it)
    if (!known.count(it.key()))
      throw Error(errc::config_invalid, "unknown key '" + it.key() + "'");

  ExperimentConfig cfg;
  if (const json* j = section(root, "world")) {
    Section s(*j, "world");
    cfg.world.n_concepts = s.field<std::size_t>("n_concepts", cfg.world.n_concepts);
    cfg.world.latent_dim = s.field<std::size_t>("latent_dim", cfg.world.latent_dim);
    cfg.world.raw_dim = s.field<std::size_t>("raw_dim", cfg.world.raw_dim);
    cfg.world.view_noise = s.field<double>("view_noise", cfg.world.view_noise);
    cfg.world.duplicate_fraction =
        s.field<double>("duplicate_fraction", cfg.world.duplicate_fraction);
    cfg.world.near_dup_cosine = s.field<double>("near_dup_cosine", cfg.world.near_dup_cosine);
    cfg.world.seed = s.field<std::uint64_t>("seed", cfg.world.seed);
    cfg.world.identity_views = s.field<bool>("identity_views", cfg.world.identity_views);
    s.done();
  }
  if (const json* j = section(root, "dedup")) {
    Section s(*j, "dedup");
    cfg.dedup.n_clusters = s.field<std::size_t>("n_clusters", cfg.dedup.n_clusters);
    cfg.dedup.epsilon = s.field<double>("epsilon", cfg.dedup.epsilon);
    cfg.dedup.seed = s.field<std::uint64_t>("seed", cfg.dedup.seed);
    s.done();
  }
  if (const json* j = section(root, "mining")) {
    Section s(*j, "mining");
    cfg.mining.k = s.field<std::size_t>("k", cfg.mining.k);
    cfg.mining.captions = s.field<std::string>("captions", cfg.mining.captions);
    cfg.mining.caption_policy = s.field<std::string>("caption_policy", cfg.mining.caption_policy);
    cfg.mining.caption_pool = s.field<std::size_t>("caption_pool", cfg.mining.caption_pool);
    cfg.mining.caption_seed = s.field<std::uint64_t>("caption_seed", cfg.mining.caption_seed);
    s.done();
  }
  if (const json* j = section(root, "judge")) {
    Section s(*j, "judge");
    cfg.judge.sharpness = s.field<double>("sharpness", cfg.judge.sharpness);
    cfg.judge.margin0 = s.field<double>("margin0", cfg.judge.margin0);
    cfg.judge.cache = s.field<std::string>("cache", cfg.judge.cache);
    s.done();
  }
  if (const json* j = section(root, "loss")) {
    Section s(*j, "loss");
    cfg.loss.lambda = s.field<double>("lambda", cfg.loss.lambda);
    cfg.loss.variant = train_variant_from_string(
        s.field<std::string>("variant", to_string(cfg.loss.variant)));
    cfg.loss.expanded_negatives =
        s.field<bool>("expanded_negatives", cfg.loss.expanded_negatives);
    s.done();
  }
  if (const json* j = section(root, "train")) {
    Section s(*j, "train");
    cfg.train.epochs = s.field<std::size_t>("epochs", cfg.train.epochs);
    cfg.train.batch_size = s.field<std::size_t>("batch_size", cfg.train.batch_size);
    cfg.train.learning_rate = s.field<double>("lr", cfg.train.learning_rate);
    cfg.train.scale_lr_multiplier =
        s.field<double>("scale_lr_multiplier", cfg.train.scale_lr_multiplier);
    cfg.train.seed = s.field<std::uint64_t>("seed", cfg.train.seed);
    cfg.train.embed_dim = s.field<std::size_t>("embed_dim", cfg.train.embed_dim);
    cfg.train.hidden_dim = s.field<std::size_t>("hidden_dim", cfg.train.hidden_dim);
    s.done();
  }
  if (const json* j = section(root, "eval")) {
    Section s(*j, "eval");
    cfg.eval.ks = s.field<std::vector<std::size_t>>("ks", cfg.eval.ks);
    cfg.eval.n_instances = s.field<std::size_t>("n_instances", cfg.eval.n_instances);
    cfg.eval.benchmark = s.field<std::string>("benchmark", cfg.eval.benchmark);
    cfg.eval.seed = s.field<std::uint64_t>("seed", cfg.eval.seed);
    s.done();
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_text_file(path));
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j{
      {"world",
       {{"n_concepts", cfg.world.n_concepts},
        {"latent_dim", cfg.world.latent_dim},
        {"raw_dim", cfg.world.raw_dim},
        {"view_noise", cfg.world.view_noise},
        {"duplicate_fraction", cfg.world.duplicate_fraction},
        {"near_dup_cosine", cfg.world.near_dup_cosine},
        {"seed", cfg.world.seed},
        {"identity_views", cfg.world.identity_views}}},
      {"dedup",
       {{"n_clusters", cfg.dedup.n_clusters},
        {"epsilon", cfg.dedup.epsilon},
        {"seed", cfg.dedup.seed}}},
      {"mining",
       {{"k", cfg.mining.k},
        {"captions", cfg.mining.captions},
        {"caption_policy", cfg.mining.caption_policy},
        {"caption_pool", cfg.mining.caption_pool},
        {"caption_seed", cfg.mining.caption_seed}}},
      {"judge",
       {{"sharpness", cfg.judge.sharpness},
        {"margin0", cfg.judge.margin0},
        {"cache", cfg.judge.cache}}},
      {"loss",
       {{"lambda", cfg.loss.lambda},
        {"variant", to_string(cfg.loss.variant)},
        {"expanded_negatives", cfg.loss.expanded_negatives}}},
      {"train",
       {{"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"lr", cfg.train.learning_rate},
        {"scale_lr_multiplier", cfg.train.scale_lr_multiplier},
        {"seed", cfg.train.seed},
        {"embed_dim", cfg.train.embed_dim},
        {"hidden_dim", cfg.train.hidden_dim}}},
      {"eval",
       {{"ks", cfg.eval.ks},
        {"n_instances", cfg.eval.n_instances},
        {"benchmark", cfg.eval.benchmark},
        {"seed", cfg.eval.seed}}}};
  return j.dump(2);
}

TrainConfig assemble_train_config(const ExperimentConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.train.epochs;
  t.batch_size = cfg.train.batch_size;
  t.learning_rate = cfg.train.learning_rate;
  t.scale_lr_multiplier = cfg.train.scale_lr_multiplier;
  t.lambda = cfg.loss.lambda;
  t.variant = cfg.loss.variant;
  t.expanded_negatives = cfg.loss.expanded_negatives;
  t.seed = cfg.train.seed;
  return t;
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.world.seed = seed;
  cfg.dedup.seed = seed;
  cfg.mining.caption_seed = seed;
  cfg.train.seed = seed;
  cfg.eval.seed = seed;
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.world);
  if (cfg.dedup.n_clusters == 0)
    throw Error(errc::config_invalid, "dedup.n_clusters must be positive");
  if (!(cfg.dedup.epsilon >= 0.0 && cfg.dedup.epsilon < 1.0))
    throw Error(errc::config_invalid, "dedup.epsilon must lie in [0, 1)");
  if (cfg.mining.k == 0) throw Error(errc::config_invalid, "mining.k must be positive");
  if (cfg.mining.caption_policy != "first" && cfg.mining.caption_policy != "sample")
    throw Error(errc::config_invalid, "mining.caption_policy must be 'first' or 'sample'");
  if (!(cfg.judge.sharpness > 0.0))
    throw Error(errc::config_invalid, "judge.sharpness must be positive");
  if (cfg.judge.cache.empty())
    throw Error(errc::config_invalid, "judge.cache must be a file name");
  if (!(cfg.loss.lambda >= 0.0 && cfg.loss.lambda <= 1.0))
    throw Error(errc::lambda_out_of_range, "loss.lambda must lie in [0, 1]");
  validate(assemble_train_config(cfg));
  if (cfg.train.embed_dim == 0)
    throw Error(errc::config_invalid, "train.embed_dim must be positive");
  if (cfg.eval.ks.empty()) throw Error(errc::config_invalid, "eval.ks must be non-empty");
  for (std::size_t k : cfg.eval.ks)
    if (k == 0) throw Error(errc::config_invalid, "eval.ks entries must be positive");
  if (cfg.eval.benchmark.empty())
    throw Error(errc::config_invalid, "eval.benchmark must be a file name");
}

}  // namespace prefalign
