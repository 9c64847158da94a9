#include "prefalign/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "prefalign/error.hpp"
#include "prefalign/rng.hpp"

namespace prefalign {
namespace {

using nlohmann::json;

/// Per-item forward pass state kept for backprop.
struct Forward {
  const EmbeddingVec* raw = nullptr;
  std::vector<double> h;  ///< hidden activation (MLP only)
  std::vector<double> y;  ///< pre-normalization output
  std::vector<double> z;  ///< normalized embedding
  double r = 0.0;         ///< ||y||
};

struct EncoderGrads {
  std::vector<double> w1, b1, w2, b2;

  explicit EncoderGrads(const ModalityEncoder& like)
      : w1(like.w1.size(), 0.0),
        b1(like.b1.size(), 0.0),
        w2(like.w2.size(), 0.0),
        b2(like.b2.size(), 0.0) {}
};

Forward forward_pass(const EncoderState& state, const EmbeddingVec& raw) {
  const auto& dims = state.dims;
  if (raw.values.size() != dims.raw_dim)
    throw Error(errc::dimension_mismatch, "item '" + raw.id + "' has dim " +
                                              std::to_string(raw.values.size()) + ", encoder expects " +
                                              std::to_string(dims.raw_dim));
  const ModalityEncoder& enc = raw.modality == Modality::text ? state.text : state.image;
  Forward f;
  f.raw = &raw;
  const auto& x = raw.values;
  if (dims.hidden_dim == 0) {
    f.y.resize(dims.embed_dim);
    for (std::size_t i = 0; i < dims.embed_dim; ++i) {
      double acc = enc.b1[i];
      for (std::size_t j = 0; j < dims.raw_dim; ++j) acc += enc.w1[i * dims.raw_dim + j] * x[j];
      f.y[i] = acc;
    }
  } else {
    f.h.resize(dims.hidden_dim);
    for (std::size_t i = 0; i < dims.hidden_dim; ++i) {
      double acc = enc.b1[i];
      for (std::size_t j = 0; j < dims.raw_dim; ++j) acc += enc.w1[i * dims.raw_dim + j] * x[j];
      f.h[i] = std::tanh(acc);
    }
    f.y.resize(dims.embed_dim);
    for (std::size_t i = 0; i < dims.embed_dim; ++i) {
      double acc = enc.b2[i];
      for (std::size_t j = 0; j < dims.hidden_dim; ++j) acc += enc.w2[i * dims.hidden_dim + j] * f.h[j];
      f.y[i] = acc;
    }
  }
  f.r = norm(f.y);
  f.z = normalize(f.y);
  return f;
}

/// Chain rule from dL/dz back into the weight gradient buffers.
void backward_pass(const EncoderState& state, const Forward& f, const std::vector<double>& gz,
                   EncoderGrads& grads) {
  const auto& dims = state.dims;
  const ModalityEncoder& enc = f.raw->modality == Modality::text ? state.text : state.image;
  const auto& x = f.raw->values;

  // z = y / ||y||  =>  dL/dy = (g - (g.z) z) / ||y||
  double gg = 0.0;
  for (std::size_t i = 0; i < gz.size(); ++i) gg += gz[i] * f.z[i];
  std::vector<double> dy(dims.embed_dim);
  for (std::size_t i = 0; i < dims.embed_dim; ++i) dy[i] = (gz[i] - gg * f.z[i]) / f.r;

  if (dims.hidden_dim == 0) {
    for (std::size_t i = 0; i < dims.embed_dim; ++i) {
      grads.b1[i] += dy[i];
      for (std::size_t j = 0; j < dims.raw_dim; ++j) grads.w1[i * dims.raw_dim + j] += dy[i] * x[j];
    }
    return;
  }
  std::vector<double> dh(dims.hidden_dim, 0.0);
  for (std::size_t i = 0; i < dims.embed_dim; ++i) {
    grads.b2[i] += dy[i];
    for (std::size_t j = 0; j < dims.hidden_dim; ++j) {
      grads.w2[i * dims.hidden_dim + j] += dy[i] * f.h[j];
      dh[j] += enc.w2[i * dims.hidden_dim + j] * dy[i];
    }
  }
  for (std::size_t j = 0; j < dims.hidden_dim; ++j) {
    double dpre = (1.0 - f.h[j] * f.h[j]) * dh[j];
    grads.b1[j] += dpre;
    for (std::size_t k = 0; k < dims.raw_dim; ++k) grads.w1[j * dims.raw_dim + k] += dpre * x[k];
  }
}

void apply(std::vector<double>& param, const std::vector<double>& grad, double lr) {
  for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

json encoder_to_json(const ModalityEncoder& e) {
  return json{{"w1", e.w1}, {"b1", e.b1}, {"w2", e.w2}, {"b2", e.b2}};
}

ModalityEncoder encoder_from_json(const json& j) {
  ModalityEncoder e;
  e.w1 = j.at("w1").get<std::vector<double>>();
  e.b1 = j.at("b1").get<std::vector<double>>();
  e.w2 = j.at("w2").get<std::vector<double>>();
  e.b2 = j.at("b2").get<std::vector<double>>();
  return e;
}

}  // namespace

double EncoderState::tau() const { return std::exp(log_tau); }
double EncoderState::beta() const { return std::exp(log_beta); }

const char* to_string(TrainVariant v) {
  switch (v) {
    case TrainVariant::pairwise: return "pairwise";
    case TrainVariant::listwise: return "listwise";
    case TrainVariant::contrast_pref: return "contrast_pref";
    case TrainVariant::none: return "none";
  }
  return "?";
}

TrainVariant train_variant_from_string(const std::string& s) {
  if (s == "pairwise") return TrainVariant::pairwise;
  if (s == "listwise") return TrainVariant::listwise;
  if (s == "contrast_pref") return TrainVariant::contrast_pref;
  if (s == "none") return TrainVariant::none;
  throw Error(errc::config_invalid, "unknown train variant '" + s + "'");
}

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 2)
    throw Error(errc::config_invalid, "train.batch_size must be >= 2");
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw Error(errc::lambda_out_of_range, "train.lambda must lie in [0, 1]");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw Error(errc::config_invalid, "train.learning_rate must be finite and >= 0");
  if (!(cfg.scale_lr_multiplier >= 0.0) || !std::isfinite(cfg.scale_lr_multiplier))
    throw Error(errc::config_invalid, "train.scale_lr_multiplier must be finite and >= 0");
}

EncoderState init_encoders(const EncoderDims& dims, std::uint64_t seed) {
  if (dims.raw_dim == 0 || dims.embed_dim == 0)
    throw Error(errc::config_invalid, "encoder dims must be positive");
  std::mt19937_64 rng(seed);
  auto init_matrix = [&](std::size_t rows, std::size_t cols) {
    std::vector<double> m(rows * cols);
    double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& v : m) v = scale * gaussian(rng);
    return m;
  };
  auto init_encoder = [&]() {
    ModalityEncoder e;
    if (dims.hidden_dim == 0) {
      e.w1 = init_matrix(dims.embed_dim, dims.raw_dim);
      e.b1.assign(dims.embed_dim, 0.0);
    } else {
      e.w1 = init_matrix(dims.hidden_dim, dims.raw_dim);
      e.b1.assign(dims.hidden_dim, 0.0);
      e.w2 = init_matrix(dims.embed_dim, dims.hidden_dim);
      e.b2.assign(dims.embed_dim, 0.0);
    }
    return e;
  };
  EncoderState state;
  state.dims = dims;
  state.text = init_encoder();
  state.image = init_encoder();
  state.log_tau = std::log(0.07);
  state.log_beta = std::log(1.0 / 0.07);
  return state;
}

EmbeddingVec encode(const EncoderState& state, const EmbeddingVec& raw) {
  Forward f = forward_pass(state, raw);
  return EmbeddingVec{raw.id, raw.modality, std::move(f.z)};
}

EmbeddingBatch encode_batch(const EncoderState& state, const EmbeddingBatch& raw) {
  std::vector<EmbeddingVec> out;
  out.reserve(raw.size());
  for (const auto& item : raw.items()) out.push_back(encode(state, item));
  return EmbeddingBatch(std::move(out));
}

std::pair<EncoderState, StepMetrics> train_step(const EncoderState& state, const TrainData& data,
                                                const std::vector<std::size_t>& batch,
                                                const TrainConfig& cfg) {
  if (batch.empty()) throw Error(errc::empty_batch, "empty training batch");
  const double tau = state.tau();
  const double beta = state.beta();

  // Gather every item this step touches, encode each exactly once.
  std::vector<const CandidateSet*> image_sets, text_sets;
  std::set<std::string> needed;
  for (std::size_t idx : batch) {
    if (idx >= data.anchors.size())
      throw Error(errc::index_out_of_range, "batch index " + std::to_string(idx) +
                                                " outside the anchor list");
    const auto& ac = data.anchors[idx];
    image_sets.push_back(&ac.images);
    text_sets.push_back(&ac.texts);
    needed.insert(ac.images.anchor_id);
    needed.insert(ac.texts.anchor_id);
    needed.insert(ac.images.candidate_ids.begin(), ac.images.candidate_ids.end());
    needed.insert(ac.texts.candidate_ids.begin(), ac.texts.candidate_ids.end());
  }

  std::map<std::string, Forward> fwd;
  for (const auto& id : needed) {
    const EmbeddingVec* raw = nullptr;
    if (auto i = data.raw_text.index_of(id)) raw = &data.raw_text[*i];
    else if (auto j = data.raw_image.index_of(id)) raw = &data.raw_image[*j];
    if (!raw)
      throw Error(errc::unknown_anchor, "item '" + id + "' missing from the raw embeddings");
    fwd.emplace(id, forward_pass(state, *raw));
  }
  auto encoded = [&](const std::string& id) {
    const Forward& f = fwd.at(id);
    return EmbeddingVec{id, f.raw->modality, f.z};
  };

  // Anchor-aligned batches for the plain contrastive term.
  auto anchor_batches = [&]() {
    std::vector<EmbeddingVec> txt, img;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      txt.push_back(encoded(image_sets[k]->anchor_id));
      img.push_back(encoded(text_sets[k]->anchor_id));
    }
    return std::pair{EmbeddingBatch(std::move(txt)), EmbeddingBatch(std::move(img))};
  };
  // Modality-pure pools from the candidate lists (positives at slot 0).
  auto pool_batches = [&]() {
    std::vector<CandidateSet> img_sets_v, txt_sets_v;
    for (auto* s : image_sets) img_sets_v.push_back(*s);
    for (auto* s : text_sets) txt_sets_v.push_back(*s);
    std::vector<EmbeddingVec> img_pool, txt_pool;
    for (const auto& id : expand_negative_pool(img_sets_v)) img_pool.push_back(encoded(id));
    for (const auto& id : expand_negative_pool(txt_sets_v)) txt_pool.push_back(encoded(id));
    return std::pair{EmbeddingBatch(std::move(txt_pool)), EmbeddingBatch(std::move(img_pool))};
  };

  auto contrastive_part = [&](bool expanded) {
    auto [txt, img] = anchor_batches();
    if (!expanded) return contrastive_loss(txt, img, tau);
    auto [txt_pool, img_pool] = pool_batches();
    return contrastive_loss_expanded(txt, img, txt_pool, img_pool, tau);
  };

  auto ranking_for = [&](const CandidateSet& set) {
    std::vector<AlignmentScore> scores;
    scores.reserve(set.candidate_ids.size());
    for (const auto& cid : set.candidate_ids) {
      auto it = data.scores.find({set.anchor_id, cid});
      if (it == data.scores.end())
        throw Error(errc::missing_score,
                    "no cached score for (" + set.anchor_id + ", " + cid + ")");
      scores.push_back(AlignmentScore{it->second});
    }
    return rank_candidates(scores);
  };
  auto directional = [&](const CandidateSet& set) {
    std::vector<EmbeddingVec> cands;
    cands.reserve(set.candidate_ids.size());
    for (const auto& cid : set.candidate_ids) cands.push_back(encoded(cid));
    return DirectionalPreference{encoded(set.anchor_id), EmbeddingBatch(std::move(cands)),
                                 ranking_for(set)};
  };

  LossOutput total;
  StepMetrics metrics;
  switch (cfg.variant) {
    case TrainVariant::none: {
      total = contrastive_part(cfg.expanded_negatives);
      metrics.loss_contrast = total.value;
      break;
    }
    case TrainVariant::contrast_pref: {
      total = contrastive_part(true);
      metrics.loss_contrast = total.value;
      break;
    }
    case TrainVariant::pairwise:
    case TrainVariant::listwise: {
      std::vector<AnchorPreferences> prefs;
      prefs.reserve(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k)
        prefs.push_back(AnchorPreferences{directional(*image_sets[k]), directional(*text_sets[k])});
      LossOutput rpa = rpa_total(prefs,
                                 cfg.variant == TrainVariant::pairwise ? RpaVariant::pairwise
                                                                       : RpaVariant::listwise,
                                 beta);
      LossOutput contrast = contrastive_part(cfg.expanded_negatives);
      metrics.loss_rpa = rpa.value;
      metrics.loss_contrast = contrast.value;
      total = combined_loss(rpa, contrast, cfg.lambda);
      break;
    }
  }
  metrics.loss_total = total.value;
  metrics.tau = tau;
  metrics.beta = beta;
  if (!std::isfinite(total.value)) {
    std::string detail = "loss is not finite";
    for (const auto& d : total.diagnostics) detail += "; " + d;
    throw Error(errc::non_finite_loss, detail);
  }

  EncoderState next = state;
  if (cfg.learning_rate > 0.0) {
    EncoderGrads gt(state.text), gi(state.image);
    for (const auto& [id, g] : total.grads) {
      const Forward& f = fwd.at(id);
      backward_pass(state, f, g, f.raw->modality == Modality::text ? gt : gi);
    }
    apply(next.text.w1, gt.w1, cfg.learning_rate);
    apply(next.text.b1, gt.b1, cfg.learning_rate);
    apply(next.text.w2, gt.w2, cfg.learning_rate);
    apply(next.text.b2, gt.b2, cfg.learning_rate);
    apply(next.image.w1, gi.w1, cfg.learning_rate);
    apply(next.image.b1, gi.b1, cfg.learning_rate);
    apply(next.image.w2, gi.w2, cfg.learning_rate);
    apply(next.image.b2, gi.b2, cfg.learning_rate);
    const double scale_lr = cfg.learning_rate * cfg.scale_lr_multiplier;
    next.log_tau -= scale_lr * total.grad_tau * tau;    // d/dlog_tau = tau d/dtau
    next.log_beta -= scale_lr * total.grad_beta * beta;
  }
  return {std::move(next), metrics};
}

TrainResult train(const TrainData& data, const EncoderDims& dims, const TrainConfig& cfg) {
  validate(cfg);
  if (data.anchors.empty()) throw Error(errc::empty_batch, "no anchors to train on");

  TrainResult result;
  result.state = init_encoders(dims, cfg.seed);
  result.checkpoints.push_back(result.state);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);  // decouple from init stream
  std::vector<std::size_t> order(data.anchors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
      auto [next, metrics] = train_step(result.state, data, batch, cfg);
      result.state = std::move(next);
      metrics.step = step++;
      result.log.push_back(metrics);
    }
    result.checkpoints.push_back(result.state);
  }
  return result;
}

std::string state_to_json(const EncoderState& state) {
  json j{{"version", 1},
         {"dims",
          {{"raw_dim", state.dims.raw_dim},
           {"embed_dim", state.dims.embed_dim},
           {"hidden_dim", state.dims.hidden_dim}}},
         {"text", encoder_to_json(state.text)},
         {"image", encoder_to_json(state.image)},
         {"log_tau", state.log_tau},
         {"log_beta", state.log_beta}};
  return j.dump();
}

EncoderState state_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(errc::io_error, "checkpoint is not valid JSON");
  if (j.value("version", 0) != 1)
    throw Error(errc::io_error, "unsupported checkpoint version");
  EncoderState s;
  const auto& d = j.at("dims");
  s.dims.raw_dim = d.at("raw_dim").get<std::size_t>();
  s.dims.embed_dim = d.at("embed_dim").get<std::size_t>();
  s.dims.hidden_dim = d.at("hidden_dim").get<std::size_t>();
  s.text = encoder_from_json(j.at("text"));
  s.image = encoder_from_json(j.at("image"));
  s.log_tau = j.at("log_tau").get<double>();
  s.log_beta = j.at("log_beta").get<double>();
  return s;
}

}  // namespace prefalign
