#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prefalign/embed.hpp"
#include "prefalign/judge.hpp"

namespace prefalign {

struct DedupConfig {
  std::size_t n_clusters = 1;
  double epsilon = 0.07;  ///< drop threshold is cosine > 1 - epsilon
  std::uint64_t seed = 0;
};

enum class Direction { txt2img, img2txt };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

/// Anchor plus its candidate list. candidate_ids[0] is always the anchor's
/// own positive; the rest are mined hard candidates.
struct CandidateSet {
  std::string anchor_id;
  Direction direction = Direction::txt2img;
  std::vector<std::string> candidate_ids;
};

/// Descending-score permutation of a candidate list. ranked_indices[k] is the
/// original index of the k-th best candidate; ties break by ascending
/// original index.
struct PreferenceRanking {
  std::vector<std::size_t> ranked_indices;
  std::vector<double> scores;  ///< per original index
};

struct PreferencePair {
  std::size_t preferred;     ///< original candidate index
  std::size_t dispreferred;  ///< original candidate index
  double weight;             ///< alignment-score margin, >= 0
};

struct PairwisePreferenceSet {
  std::vector<PreferencePair> pairs;
};

/// Ranked list with per-suffix average-margin weights:
/// w_k = (1/(K-k)) * sum_{l=k+1..K} (alpha_{r_k} - alpha_{r_l}).
struct ListwisePreferenceSet {
  std::vector<std::size_t> ranked_indices;
  std::vector<double> suffix_weights;  ///< length K (one per suffix start 0..K-1)
};

/// Cluster the gallery (seeded farthest-point init + Lloyd iterations), then
/// within each cluster greedily drop items whose cosine to an already-kept
/// member exceeds 1 - epsilon, scanning in ascending id order. Returns kept
/// ids in ascending order. Output is independent of gallery input order.
std::vector<std::string> semantic_dedup(const EmbeddingBatch& gallery, const DedupConfig& cfg);

/// The K non-anchor ids with highest cosine to the anchor, descending; ties
/// by ascending id.
std::vector<std::string> mine_hard_negatives(const std::string& anchor_id,
                                             const EmbeddingBatch& gallery, std::size_t k);

/// Maps a mined image id to the text forming its candidate caption. Multiple
/// captions per image are supported; pick_for chooses one deterministically.
class CaptionSource {
 public:
  enum class Policy { first, sample };

  CaptionSource() = default;
  CaptionSource(std::map<std::string, std::vector<std::string>> captions, Policy policy,
                std::size_t sample_pool = 0, std::uint64_t seed = 0);

  /// sample_pool limits sampling to the first n captions (0 = all).
  const std::string& pick_for(const std::string& image_id) const;

 private:
  std::map<std::string, std::vector<std::string>> captions_;
  Policy policy_ = Policy::first;
  std::size_t sample_pool_ = 0;
  std::uint64_t seed_ = 0;
};

struct AnchorPair {
  std::string text_id;
  std::string image_id;
};

struct AnchorCandidates {
  CandidateSet images;  ///< txt2img: anchor text vs image candidates
  CandidateSet texts;   ///< img2txt: anchor image vs text candidates
};

/// For each anchor: image set = own image + K mined; text set = own text +
/// the mined images' captions, index-aligned with the image set.
std::vector<AnchorCandidates> build_candidate_sets(const std::vector<AnchorPair>& anchors,
                                                   const EmbeddingBatch& image_gallery,
                                                   std::size_t k, const CaptionSource& captions);

/// Stable descending sort of alignment scores; ties by ascending index.
PreferenceRanking rank_candidates(const std::vector<AlignmentScore>& scores);

/// All C(K+1, 2) ordered pairs (r_a, r_b) with a < b, weighted by score margin.
/// max_pairs > 0 keeps a seeded subsample of that size.
PairwisePreferenceSet build_pairwise(const PreferenceRanking& r, std::size_t max_pairs = 0,
                                     std::uint64_t seed = 0);

ListwisePreferenceSet build_listwise(const PreferenceRanking& r);

/// Deduplicated union of the candidate lists, first-occurrence order. Every
/// anchor's own positive is candidate_ids[0], so the pool covers all anchors
/// while staying <= N(1+K).
std::vector<std::string> expand_negative_pool(const std::vector<CandidateSet>& sets);

}  // namespace prefalign
