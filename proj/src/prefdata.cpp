#include "prefalign/prefdata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "prefalign/hash.hpp"

namespace prefalign {

const char* to_string(Direction d) { return d == Direction::txt2img ? "txt2img" : "img2txt"; }

Direction direction_from_string(const std::string& s) {
  if (s == "txt2img") return Direction::txt2img;
  if (s == "img2txt") return Direction::img2txt;
  throw Error(errc::config_invalid, "unknown direction '" + s + "'");
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<std::string> semantic_dedup(const EmbeddingBatch& gallery, const DedupConfig& cfg) {
  if (cfg.n_clusters == 0 || cfg.n_clusters > gallery.size())
    throw Error(errc::config_invalid,
                "n_clusters must be in [1, gallery size]; got " + std::to_string(cfg.n_clusters) +
                    " for gallery of " + std::to_string(gallery.size()));
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon < 1.0))
    throw Error(errc::config_invalid, "epsilon must be in [0, 1)");

  // Canonical id order makes the result independent of gallery input order.
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return gallery[a].id < gallery[b].id; });

  const std::size_t n = order.size();
  const std::size_t k = cfg.n_clusters;

  // Farthest-point center initialization, first pick seeded.
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = static_cast<std::size_t>(rng() % n);
    centers.push_back(gallery[order[first]].values);
  }
  while (centers.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t p = 0; p < n; ++p) {
      nearest[p] = std::min(nearest[p], sq_dist(gallery[order[p]].values, centers.back()));
      if (nearest[p] > best_d) {
        best_d = nearest[p];
        best = p;
      }
    }
    centers.push_back(gallery[order[best]].values);
  }

  // Lloyd iterations, capped.
  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t best_c = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = sq_dist(gallery[order[p]].values, centers[c]);
        if (d < best_d) {
          best_d = d;
          best_c = c;
        }
      }
      if (assign[p] != best_c) {
        assign[p] = best_c;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(gallery.dim(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      ++counts[assign[p]];
      const auto& v = gallery[order[p]].values;
      for (std::size_t d = 0; d < v.size(); ++d) sums[assign[p]][d] += v[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its previous center
      for (std::size_t d = 0; d < sums[c].size(); ++d)
        centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }

  // Greedy near-duplicate drop within each cluster, ascending id order.
  const double threshold = 1.0 - cfg.epsilon;
  std::vector<std::string> kept;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> kept_here;
    for (std::size_t p = 0; p < n; ++p) {
      if (assign[p] != c) continue;
      bool duplicate = false;
      for (std::size_t q : kept_here) {
        if (cosine(gallery[order[p]], gallery[order[q]]) > threshold) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        kept_here.push_back(p);
        kept.push_back(gallery[order[p]].id);
      }
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::string> mine_hard_negatives(const std::string& anchor_id,
                                             const EmbeddingBatch& gallery, std::size_t k) {
  const auto anchor_idx = gallery.index_of(anchor_id);
  if (!anchor_idx)
    throw Error(errc::unknown_anchor, "anchor '" + anchor_id + "' not in gallery");
  if (k > gallery.size() - 1)
    throw Error(errc::k_too_large, "K=" + std::to_string(k) + " but gallery has only " +
                                       std::to_string(gallery.size() - 1) + " non-anchor items");

  struct Scored {
    double sim;
    const std::string* id;
  };
  std::vector<Scored> scored;
  scored.reserve(gallery.size() - 1);
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (i == *anchor_idx) continue;
    scored.push_back({cosine(gallery[*anchor_idx], gallery[i]), &gallery[i].id});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return *a.id < *b.id;
  });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(*scored[i].id);
  return out;
}

CaptionSource::CaptionSource(std::map<std::string, std::vector<std::string>> captions,
                             Policy policy, std::size_t sample_pool, std::uint64_t seed)
    : captions_(std::move(captions)), policy_(policy), sample_pool_(sample_pool), seed_(seed) {}

const std::string& CaptionSource::pick_for(const std::string& image_id) const {
  auto it = captions_.find(image_id);
  if (it == captions_.end() || it->second.empty())
    throw Error(errc::missing_caption, "no caption for image '" + image_id + "'");
  const auto& pool = it->second;
  if (policy_ == Policy::first) return pool.front();
  std::size_t limit = pool.size();
  if (sample_pool_ > 0) limit = std::min(limit, sample_pool_);
  // Per-image derived seed: the pick is independent of query order.
  std::mt19937_64 rng(seed_ ^ fnv1a64(image_id));
  return pool[static_cast<std::size_t>(rng() % limit)];
}

std::vector<AnchorCandidates> build_candidate_sets(const std::vector<AnchorPair>& anchors,
                                                   const EmbeddingBatch& image_gallery,
                                                   std::size_t k, const CaptionSource& captions) {
  std::vector<AnchorCandidates> out;
  out.reserve(anchors.size());
  for (const auto& anchor : anchors) {
    const auto mined = mine_hard_negatives(anchor.image_id, image_gallery, k);
    AnchorCandidates ac;
    ac.images.anchor_id = anchor.text_id;
    ac.images.direction = Direction::txt2img;
    ac.images.candidate_ids.push_back(anchor.image_id);
    ac.texts.anchor_id = anchor.image_id;
    ac.texts.direction = Direction::img2txt;
    ac.texts.candidate_ids.push_back(anchor.text_id);
    for (const auto& img : mined) {
      ac.images.candidate_ids.push_back(img);
      ac.texts.candidate_ids.push_back(captions.pick_for(img));
    }
    out.push_back(std::move(ac));
  }
  return out;
}

PreferenceRanking rank_candidates(const std::vector<AlignmentScore>& scores) {
  if (scores.empty()) throw Error(errc::empty_scores, "cannot rank an empty score vector");
  PreferenceRanking r;
  r.scores.reserve(scores.size());
  for (const auto& s : scores) r.scores.push_back(s.value);
  r.ranked_indices.resize(scores.size());
  std::iota(r.ranked_indices.begin(), r.ranked_indices.end(), 0);
  std::stable_sort(r.ranked_indices.begin(), r.ranked_indices.end(),
                   [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
  return r;
}

PairwisePreferenceSet build_pairwise(const PreferenceRanking& r, std::size_t max_pairs,
                                     std::uint64_t seed) {
  const std::size_t n = r.ranked_indices.size();
  if (n < 2)
    throw Error(errc::too_few_candidates, "pairwise preferences need at least 2 candidates");
  PairwisePreferenceSet out;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::size_t ra = r.ranked_indices[a];
      const std::size_t rb = r.ranked_indices[b];
      out.pairs.push_back({ra, rb, r.scores[ra] - r.scores[rb]});
    }
  }
  if (max_pairs > 0 && max_pairs < out.pairs.size()) {
    std::vector<std::size_t> pick(out.pairs.size());
    std::iota(pick.begin(), pick.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(max_pairs);
    std::sort(pick.begin(), pick.end());  // keep canonical enumeration order
    std::vector<PreferencePair> sampled;
    sampled.reserve(max_pairs);
    for (std::size_t i : pick) sampled.push_back(out.pairs[i]);
    out.pairs = std::move(sampled);
  }
  return out;
}

ListwisePreferenceSet build_listwise(const PreferenceRanking& r) {
  const std::size_t n = r.ranked_indices.size();
  if (n < 2)
    throw Error(errc::too_few_candidates, "listwise preferences need at least 2 candidates");
  ListwisePreferenceSet out;
  out.ranked_indices = r.ranked_indices;
  const std::size_t k_max = n - 1;
  out.suffix_weights.reserve(k_max);
  for (std::size_t k = 0; k < k_max; ++k) {
    double s = 0.0;
    for (std::size_t l = k + 1; l <= k_max; ++l)
      s += r.scores[r.ranked_indices[k]] - r.scores[r.ranked_indices[l]];
    out.suffix_weights.push_back(s / static_cast<double>(k_max - k));
  }
  return out;
}

std::vector<std::string> expand_negative_pool(const std::vector<CandidateSet>& sets) {
  if (sets.empty()) throw Error(errc::empty_batch, "no candidate sets to pool");
  std::vector<std::string> pool;
  std::set<std::string> seen;
  auto add = [&](const std::string& id) {
    if (seen.insert(id).second) pool.push_back(id);
  };
  // candidate_ids[0] is the anchor's own positive, so every anchor is
  // represented; anchor_id itself is the opposite modality and stays out.
  for (const auto& set : sets)
    for (const auto& id : set.candidate_ids) add(id);
  return pool;
}

}  // namespace prefalign
