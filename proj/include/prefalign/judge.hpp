#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "prefalign/error.hpp"

namespace prefalign {

/// Raw yes/no logits from a relevance query.
struct JudgeLogits {
  double l_yes = 0.0;
  double l_no = 0.0;
};

/// Softmax-normalized match confidence in [0, 1].
struct AlignmentScore {
  double value = 0.0;
};

/// An item as seen by a judge: stable id (for caching) plus the payload the
/// judge actually scores.
struct JudgedItem {
  std::string id;
  std::vector<double> payload;
};

/// Alignment oracle. Deterministic: the same (anchor, candidate) pair must
/// yield identical logits within one run.
class AlignmentJudge {
 public:
  virtual ~AlignmentJudge() = default;
  virtual JudgeLogits logits(const JudgedItem& anchor, const JudgedItem& candidate) = 0;
};

/// alpha = exp(l_yes) / (exp(l_yes) + exp(l_no)) = sigmoid(l_yes - l_no),
/// evaluated in overflow-safe form.
AlignmentScore score_from_logits(const JudgeLogits& l);

inline constexpr double kDefaultJudgeMargin = 0.5;

/// l_yes = sharpness * (cosine(latent_a, latent_b) - margin0), l_no = 0.
JudgeLogits synthetic_judge_logits(std::span<const double> latent_a,
                                   std::span<const double> latent_b, double sharpness,
                                   double margin0 = kDefaultJudgeMargin);

/// Judge whose payloads are latent vectors; scores are a sharpness-scaled
/// margin of latent cosine over margin0.
class SyntheticJudge : public AlignmentJudge {
 public:
  SyntheticJudge(double sharpness, double margin0 = kDefaultJudgeMargin);
  JudgeLogits logits(const JudgedItem& anchor, const JudgedItem& candidate) override;

 private:
  double sharpness_;
  double margin0_;
};

/// One alignment score per candidate, order preserving. Judge failures are
/// rethrown with the failing candidate index attached.
std::vector<AlignmentScore> batch_score(const JudgedItem& anchor,
                                        const std::vector<JudgedItem>& candidates,
                                        AlignmentJudge& judge);

/// Write-through JSONL cache around an inner judge. Without an inner judge it
/// replays a previously written cache and throws CacheMiss on unknown pairs.
///
/// Cache record format, one per line:
///   {"anchor": id, "candidate": id, "l_yes": number, "l_no": number}
/// Duplicate (anchor, candidate) keys: the last record wins.
class CachedJudge : public AlignmentJudge {
 public:
  CachedJudge(std::unique_ptr<AlignmentJudge> inner, const std::filesystem::path& cache_path);

  /// Read-only replay of an existing cache file.
  static std::unique_ptr<CachedJudge> replay(const std::filesystem::path& cache_path);

  JudgeLogits logits(const JudgedItem& anchor, const JudgedItem& candidate) override;

  std::size_t hits() const { return hits_; }
  std::size_t entries() const { return cache_.size(); }

 private:
  CachedJudge(const std::filesystem::path& cache_path);
  void load();

  std::unique_ptr<AlignmentJudge> inner_;
  std::filesystem::path path_;
  std::map<std::pair<std::string, std::string>, JudgeLogits> cache_;
  std::size_t hits_ = 0;
  std::mutex mutex_;
};

}  // namespace prefalign
