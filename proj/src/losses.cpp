#include "prefalign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "prefalign/error.hpp"

namespace prefalign {
namespace {

double softplus(double x) {
  // max(x, 0) + log1p(exp(-|x|)) is stable for large |x|.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

void add_scaled(std::vector<double>& acc, std::span<const double> v, double c) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) acc[k] += c * v[k];
}

/// log sum_{j in [lo, hi)} exp(s[j]), computed against the running max.
double log_sum_exp(const std::vector<double>& s, std::size_t lo, std::size_t hi) {
  double m = s[lo];
  for (std::size_t j = lo + 1; j < hi; ++j) m = std::max(m, s[j]);
  double total = 0.0;
  for (std::size_t j = lo; j < hi; ++j) total += std::exp(s[j] - m);
  return m + std::log(total);
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw Error(errc::non_positive_tau, "tau must be positive");
  if (!(cfg.beta > 0.0)) throw Error(errc::config_invalid, "beta must be positive");
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw Error(errc::lambda_out_of_range, "lambda must lie in [0, 1]");
}

void accumulate(LossOutput& acc, const LossOutput& x, double c) {
  if (c == 0.0) return;
  acc.value += c * x.value;
  for (const auto& [id, g] : x.grads) {
    auto& target = acc.grads[id];
    if (!target.empty() && target.size() != g.size())
      throw Error(errc::dimension_mismatch, "gradient dimension mismatch for id '" + id + "'");
    add_scaled(target, g, c);
  }
  acc.grad_tau += c * x.grad_tau;
  acc.grad_beta += c * x.grad_beta;
  acc.diagnostics.insert(acc.diagnostics.end(), x.diagnostics.begin(), x.diagnostics.end());
}

LossOutput contrastive_loss(const EmbeddingBatch& txt, const EmbeddingBatch& img, double tau) {
  if (!(tau > 0.0)) throw Error(errc::non_positive_tau, "tau must be positive");
  if (txt.size() != img.size())
    throw Error(errc::size_mismatch, "text batch has " + std::to_string(txt.size()) +
                                         " items, image batch " + std::to_string(img.size()));
  if (txt.dim() != img.dim())
    throw Error(errc::dimension_mismatch, "text dim " + std::to_string(txt.dim()) +
                                              " vs image dim " + std::to_string(img.dim()));

  const std::size_t n = txt.size();
  std::vector<std::vector<double>> s(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s[i][j] = dot(img[i].values, txt[j].values);

  // Row softmax: image anchor i over texts. Column softmax: text anchor j
  // over images. Both share the same logit matrix s / tau.
  std::vector<double> row_lse(n), col_lse(n);
  {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(n);
      for (std::size_t j = 0; j < n; ++j) row[j] = s[i][j] / tau;
      row_lse[i] = log_sum_exp(row, 0, n);
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) col[i] = s[i][j] / tau;
      col_lse[j] = log_sum_exp(col, 0, n);
    }
  }

  LossOutput out;
  const double inv2n = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    out.value += inv2n * ((row_lse[i] - s[i][i] / tau) + (col_lse[i] - s[i][i] / tau));

  // dL/dS_ij = (1/(2 N tau)) [(p_ij - delta_ij) + (q_ij - delta_ij)] with
  // p the row softmax and q the column softmax;
  // dL/dtau = -(1/tau) sum_ij S_ij dL/dS_ij.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double p = std::exp(s[i][j] / tau - row_lse[i]);
      double q = std::exp(s[i][j] / tau - col_lse[j]);
      double delta = (i == j) ? 1.0 : 0.0;
      double g = inv2n / tau * ((p - delta) + (q - delta));
      if (g == 0.0) continue;
      add_scaled(out.grads[img[i].id], txt[j].values, g);
      add_scaled(out.grads[txt[j].id], img[i].values, g);
      out.grad_tau -= g * s[i][j] / tau;
    }
  }
  return out;
}

LossOutput contrastive_loss_expanded(const EmbeddingBatch& txt_anchors,
                                     const EmbeddingBatch& img_anchors,
                                     const EmbeddingBatch& txt_pool,
                                     const EmbeddingBatch& img_pool, double tau) {
  if (!(tau > 0.0)) throw Error(errc::non_positive_tau, "tau must be positive");
  if (txt_anchors.size() != img_anchors.size())
    throw Error(errc::size_mismatch,
                "text anchors " + std::to_string(txt_anchors.size()) + " vs image anchors " +
                    std::to_string(img_anchors.size()));
  if (txt_anchors.dim() != img_anchors.dim() || txt_anchors.dim() != txt_pool.dim() ||
      txt_anchors.dim() != img_pool.dim())
    throw Error(errc::dimension_mismatch, "anchor and pool dimensions must agree");

  const std::size_t n = txt_anchors.size();
  LossOutput out;
  const double inv2n = 1.0 / (2.0 * static_cast<double>(n));

  // One cross-entropy row per (anchor, opposite-modality pool).
  auto add_row = [&](const EmbeddingVec& anchor, const EmbeddingBatch& pool,
                     const std::string& positive_id) {
    auto pos = pool.index_of(positive_id);
    if (!pos)
      throw Error(errc::positive_missing_from_pool,
                  "positive '" + positive_id + "' for anchor '" + anchor.id +
                      "' is not in the pool");
    const std::size_t m = pool.size();
    std::vector<double> logits(m), raw(m);
    for (std::size_t t = 0; t < m; ++t) {
      raw[t] = dot(anchor.values, pool[t].values);
      logits[t] = raw[t] / tau;
    }
    double lse = log_sum_exp(logits, 0, m);
    out.value += inv2n * (lse - logits[*pos]);
    for (std::size_t t = 0; t < m; ++t) {
      double p = std::exp(logits[t] - lse);
      double delta = (t == *pos) ? 1.0 : 0.0;
      double g = inv2n / tau * (p - delta);
      if (g != 0.0) {
        add_scaled(out.grads[anchor.id], pool[t].values, g);
        add_scaled(out.grads[pool[t].id], anchor.values, g);
        out.grad_tau -= g * raw[t] / tau;
      }
      // An unrelated pool item that coincides with the positive silently
      // halves the positive's softmax mass; surface it.
      if (t != *pos && pool[t].id != positive_id &&
          dot(pool[t].values, pool[*pos].values) > 1.0 - 1e-9) {
        out.diagnostics.push_back("pool item '" + pool[t].id + "' duplicates positive '" +
                                  positive_id + "' of anchor '" + anchor.id + "'");
      }
    }
  };

  for (std::size_t i = 0; i < n; ++i) add_row(img_anchors[i], txt_pool, txt_anchors[i].id);
  for (std::size_t i = 0; i < n; ++i) add_row(txt_anchors[i], img_pool, img_anchors[i].id);
  return out;
}

double preference_logit_loss(double s_w, double s_l) { return softplus(-(s_w - s_l)); }

LossOutput rpa_pairwise_dir(const EmbeddingVec& anchor, const EmbeddingBatch& candidates,
                            const PairwisePreferenceSet& prefs, double beta) {
  if (anchor.values.size() != candidates.dim())
    throw Error(errc::dimension_mismatch, "anchor dim " + std::to_string(anchor.values.size()) +
                                              " vs candidate dim " +
                                              std::to_string(candidates.dim()));
  LossOutput out;
  for (const auto& pair : prefs.pairs) {
    if (pair.preferred >= candidates.size() || pair.dispreferred >= candidates.size())
      throw Error(errc::index_out_of_range, "preference pair references candidate index "
                                            "outside the list");
    if (pair.weight == 0.0) continue;  // exactly zero loss and gradient
    double d_pref = dot(anchor.values, candidates[pair.preferred].values);
    double d_disp = dot(anchor.values, candidates[pair.dispreferred].values);
    double m = beta * (d_pref - d_disp);
    out.value += pair.weight * softplus(-m);
    // d softplus(-m)/dm = sigmoid(m) - 1
    double g = pair.weight * (sigmoid(m) - 1.0);
    if (g == 0.0) continue;
    auto& da = out.grads[anchor.id];
    add_scaled(da, candidates[pair.preferred].values, g * beta);
    add_scaled(da, candidates[pair.dispreferred].values, -g * beta);
    add_scaled(out.grads[candidates[pair.preferred].id], anchor.values, g * beta);
    add_scaled(out.grads[candidates[pair.dispreferred].id], anchor.values, -g * beta);
    out.grad_beta += g * (d_pref - d_disp);
  }
  return out;
}

LossOutput rpa_listwise_dir(const EmbeddingVec& anchor, const EmbeddingBatch& candidates,
                            const ListwisePreferenceSet& prefs, double beta) {
  if (anchor.values.size() != candidates.dim())
    throw Error(errc::dimension_mismatch, "anchor dim " + std::to_string(anchor.values.size()) +
                                              " vs candidate dim " +
                                              std::to_string(candidates.dim()));
  const std::size_t len = prefs.ranked_indices.size();
  if (prefs.suffix_weights.size() + 1 != len)
    throw Error(errc::size_mismatch, "expected " + std::to_string(len == 0 ? 0 : len - 1) +
                                         " suffix weights, got " +
                                         std::to_string(prefs.suffix_weights.size()));
  for (std::size_t idx : prefs.ranked_indices)
    if (idx >= candidates.size())
      throw Error(errc::index_out_of_range,
                  "ranked index " + std::to_string(idx) + " outside the candidate list");

  std::vector<double> raw(len), s(len);
  for (std::size_t j = 0; j < len; ++j) {
    raw[j] = dot(anchor.values, candidates[prefs.ranked_indices[j]].values);
    s[j] = beta * raw[j];
  }

  LossOutput out;
  std::vector<double> ds(len, 0.0);  // dL/ds_j by ranked position
  for (std::size_t k = 0; k + 1 < len; ++k) {
    double w = prefs.suffix_weights[k];
    if (w == 0.0) continue;
    double lse = log_sum_exp(s, k, len);
    out.value += w * (lse - s[k]);
    for (std::size_t j = k; j < len; ++j)
      ds[j] += w * (std::exp(s[j] - lse) - (j == k ? 1.0 : 0.0));
  }
  for (std::size_t j = 0; j < len; ++j) {
    if (ds[j] == 0.0) continue;
    const auto& cand = candidates[prefs.ranked_indices[j]];
    add_scaled(out.grads[anchor.id], cand.values, ds[j] * beta);
    add_scaled(out.grads[cand.id], anchor.values, ds[j] * beta);
    out.grad_beta += ds[j] * raw[j];
  }
  return out;
}

LossOutput rpa_total(const std::vector<AnchorPreferences>& batch, RpaVariant variant,
                     double beta) {
  if (batch.empty()) throw Error(errc::empty_batch, "no anchors in RPA batch");

  auto dir_loss = [&](const DirectionalPreference& d) {
    if (variant == RpaVariant::pairwise)
      return rpa_pairwise_dir(d.anchor, d.candidates, build_pairwise(d.ranking), beta);
    return rpa_listwise_dir(d.anchor, d.candidates, build_listwise(d.ranking), beta);
  };

  LossOutput out;
  const double c = 1.0 / (2.0 * static_cast<double>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& entry = batch[i];
    if (!entry.txt2img || !entry.img2txt)
      throw Error(errc::missing_direction,
                  "batch entry " + std::to_string(i) + " lacks a " +
                      (entry.txt2img ? "img2txt" : "txt2img") + " ranking");
    accumulate(out, dir_loss(*entry.txt2img), c);
    accumulate(out, dir_loss(*entry.img2txt), c);
  }
  return out;
}

LossOutput combined_loss(const LossOutput& rpa, const LossOutput& contrast, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(errc::lambda_out_of_range,
                "lambda must lie in [0, 1], got " + std::to_string(lambda));
  LossOutput out;
  accumulate(out, rpa, lambda);
  accumulate(out, contrast, 1.0 - lambda);
  return out;
}

}  // namespace prefalign
