#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefalign/embed.hpp"

namespace prefalign {

/// Empirical 1-D distribution of similarity or alignment scores.
struct SimilaritySample {
  std::vector<double> values;
};

/// Two matching cross-modal pairs: (t0, i0) and (t1, i1).
struct FineGrainedInstance {
  std::string t0;
  std::string t1;
  std::string i0;
  std::string i1;
};

struct GapReport {
  double w_dist_gap = 0.0;
  double w_disc_gap = 0.0;
  /// w_dist_gap / w_disc_gap; empty when w_disc_gap == 0 (collapsed model).
  std::optional<double> delta_gap;
  std::size_t n_anchors = 0;
};

/// Scores an (item, item) pair. Either embedding cosine or a judge alignment
/// score; the gap metric is agnostic to which.
using SimilarityScorer = std::function<double(const std::string&, const std::string&)>;

struct GapOptions {
  /// Pool all anchors' pair similarities into single dataset-wide
  /// distributions instead of averaging per-anchor distances.
  bool pooled = false;
};

/// Exact 1-Wasserstein distance between two empirical distributions via
/// quantile functions. For equal sizes this is the mean absolute difference
/// of the sorted samples.
double wasserstein1(const SimilaritySample& a, const SimilaritySample& b);

/// || mean(txt) - mean(img) ||.
double mean_gap(const EmbeddingBatch& txt, const EmbeddingBatch& img);

struct AnchorDistributions {
  SimilaritySample cross_matched;    ///< anchor vs every I0 image (own match included)
  SimilaritySample intra;            ///< anchor vs every other T0 text
  SimilaritySample cross_mismatched; ///< anchor vs every I1 image
};

AnchorDistributions per_anchor_distributions(const std::string& anchor_id,
                                             const std::vector<FineGrainedInstance>& dataset,
                                             const SimilarityScorer& scorer);

GapReport gap_report(const std::vector<FineGrainedInstance>& dataset,
                     const SimilarityScorer& scorer, const GapOptions& opts = {});

/// One GapReport per scorer (e.g. one per training checkpoint), in order.
std::vector<GapReport> gap_curve(const std::vector<SimilarityScorer>& scorers,
                                 const std::vector<FineGrainedInstance>& dataset,
                                 const GapOptions& opts = {});

/// Cosine scorer over a fixed id -> embedding table. Unknown ids throw MissingScore.
SimilarityScorer embedding_scorer(std::map<std::string, EmbeddingVec> table);

}  // namespace prefalign
