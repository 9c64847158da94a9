#include "prefalign/judge.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "prefalign/embed.hpp"

namespace prefalign {

AlignmentScore score_from_logits(const JudgeLogits& l) {
  if (!std::isfinite(l.l_yes) || !std::isfinite(l.l_no))
    throw Error(errc::non_finite_logit, "logits must be finite");
  const double d = l.l_yes - l.l_no;
  double value;
  if (d >= 0.0) {
    value = 1.0 / (1.0 + std::exp(-d));
  } else {
    const double e = std::exp(d);
    value = e / (1.0 + e);
  }
  return AlignmentScore{value};
}

JudgeLogits synthetic_judge_logits(std::span<const double> latent_a,
                                   std::span<const double> latent_b, double sharpness,
                                   double margin0) {
  if (latent_a.size() != latent_b.size())
    throw Error(errc::dimension_mismatch, "latents of dimensions " +
                                              std::to_string(latent_a.size()) + " and " +
                                              std::to_string(latent_b.size()));
  const double c = cosine_values(latent_a, latent_b);
  return JudgeLogits{sharpness * (c - margin0), 0.0};
}

SyntheticJudge::SyntheticJudge(double sharpness, double margin0)
    : sharpness_(sharpness), margin0_(margin0) {
  if (!(sharpness > 0.0))
    throw Error(errc::config_invalid, "judge sharpness must be positive");
}

JudgeLogits SyntheticJudge::logits(const JudgedItem& anchor, const JudgedItem& candidate) {
  return synthetic_judge_logits(anchor.payload, candidate.payload, sharpness_, margin0_);
}

std::vector<AlignmentScore> batch_score(const JudgedItem& anchor,
                                        const std::vector<JudgedItem>& candidates,
                                        AlignmentJudge& judge) {
  if (candidates.empty()) throw Error(errc::empty_batch, "candidate set must be non-empty");
  std::vector<AlignmentScore> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      out.push_back(score_from_logits(judge.logits(anchor, candidates[i])));
    } catch (const Error& e) {
      throw Error(e.code(), "candidate " + std::to_string(i) + " ('" + candidates[i].id +
                                "'): " + e.what());
    }
  }
  return out;
}

CachedJudge::CachedJudge(const std::filesystem::path& cache_path) : path_(cache_path) { load(); }

CachedJudge::CachedJudge(std::unique_ptr<AlignmentJudge> inner,
                         const std::filesystem::path& cache_path)
    : inner_(std::move(inner)), path_(cache_path) {
  load();
  // Probe writability up front so misconfiguration fails at construction.
  std::ofstream probe(path_, std::ios::app);
  if (!probe) throw Error(errc::io_error, "cache path not writable: " + path_.string());
}

std::unique_ptr<CachedJudge> CachedJudge::replay(const std::filesystem::path& cache_path) {
  if (!std::filesystem::exists(cache_path))
    throw Error(errc::io_error, "cache file not found: " + cache_path.string());
  return std::unique_ptr<CachedJudge>(new CachedJudge(cache_path));
}

void CachedJudge::load() {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw Error(errc::io_error, "cannot open cache file: " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("anchor") ||
        !rec.contains("candidate") || !rec.contains("l_yes") || !rec.contains("l_no") ||
        !rec["anchor"].is_string() || !rec["candidate"].is_string() ||
        !rec["l_yes"].is_number() || !rec["l_no"].is_number()) {
      throw Error(errc::cache_corrupt,
                  "malformed record at " + path_.string() + ":" + std::to_string(lineno));
    }
    // Last record wins on duplicate keys.
    cache_[{rec["anchor"].get<std::string>(), rec["candidate"].get<std::string>()}] =
        JudgeLogits{rec["l_yes"].get<double>(), rec["l_no"].get<double>()};
  }
}

JudgeLogits CachedJudge::logits(const JudgedItem& anchor, const JudgedItem& candidate) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_pair(anchor.id, candidate.id);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  if (!inner_)
    throw Error(errc::cache_miss,
                "no cached logits for ('" + anchor.id + "', '" + candidate.id + "')");
  const JudgeLogits l = inner_->logits(anchor, candidate);
  cache_[key] = l;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(errc::io_error, "cannot append to cache file: " + path_.string());
  nlohmann::json rec{{"anchor", anchor.id},
                     {"candidate", candidate.id},
                     {"l_yes", l.l_yes},
                     {"l_no", l.l_no}};
  out << rec.dump() << "\n";
  return l;
}

}  // namespace prefalign
