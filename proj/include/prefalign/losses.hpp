#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefalign/embed.hpp"
#include "prefalign/prefdata.hpp"

namespace prefalign {

struct LossConfig {
  double tau = 0.07;
  double beta = 1.0 / 0.07;
  double lambda = 0.5;
};

void validate(const LossConfig& cfg);

/// Scalar loss plus analytic gradients w.r.t. every participating embedding
/// (keyed by id) and the learnable scales.
struct LossOutput {
  double value = 0.0;
  std::map<std::string, std::vector<double>> grads;
  double grad_tau = 0.0;
  double grad_beta = 0.0;
  std::vector<std::string> diagnostics;
};

/// acc += c * x (value, gradient maps and scale gradients alike).
void accumulate(LossOutput& acc, const LossOutput& x, double c);

/// Symmetric InfoNCE over index-aligned positives: average of the img->txt
/// and txt->img cross-entropy terms with logits (z_img . z_txt) / tau.
LossOutput contrastive_loss(const EmbeddingBatch& txt, const EmbeddingBatch& img, double tau);

/// Same objective, but each softmax denominator ranges over the full pool of
/// opposite-modality items. Every anchor's positive must be present in the
/// pool (by id). A pool item duplicating a positive under a different id is
/// reported in diagnostics.
LossOutput contrastive_loss_expanded(const EmbeddingBatch& txt_anchors,
                                     const EmbeddingBatch& img_anchors,
                                     const EmbeddingBatch& txt_pool,
                                     const EmbeddingBatch& img_pool, double tau);

/// -log sigmoid(s_w - s_l), evaluated as softplus(-(s_w - s_l)).
double preference_logit_loss(double s_w, double s_l);

/// Weighted pairwise margin loss over one anchor's candidate list:
/// sum over pairs of weight * -log sigmoid(beta z_a.z_pref - beta z_a.z_disp).
LossOutput rpa_pairwise_dir(const EmbeddingVec& anchor, const EmbeddingBatch& candidates,
                            const PairwisePreferenceSet& prefs, double beta);

/// Weighted suffix-softmax loss over one anchor's ranked candidate list.
LossOutput rpa_listwise_dir(const EmbeddingVec& anchor, const EmbeddingBatch& candidates,
                            const ListwisePreferenceSet& prefs, double beta);

enum class RpaVariant { pairwise, listwise };

/// One anchor's inputs for a single ranking direction.
struct DirectionalPreference {
  EmbeddingVec anchor;
  EmbeddingBatch candidates;
  PreferenceRanking ranking;
};

struct AnchorPreferences {
  std::optional<DirectionalPreference> txt2img;
  std::optional<DirectionalPreference> img2txt;
};

/// (1/2) (mean over anchors of txt2img + mean over anchors of img2txt).
LossOutput rpa_total(const std::vector<AnchorPreferences>& batch, RpaVariant variant,
                     double beta);

/// lambda * rpa + (1 - lambda) * contrast.
LossOutput combined_loss(const LossOutput& rpa, const LossOutput& contrast, double lambda);

}  // namespace prefalign
