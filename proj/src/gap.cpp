#include "prefalign/gap.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace prefalign {

namespace {

void check_sample(const SimilaritySample& s, const char* which) {
  if (s.values.empty())
    throw Error(errc::empty_sample, std::string("sample '") + which + "' is empty");
  for (double x : s.values)
    if (!std::isfinite(x))
      throw Error(errc::empty_sample, std::string("sample '") + which + "' has non-finite values");
}

}  // namespace

double wasserstein1(const SimilaritySample& a, const SimilaritySample& b) {
  check_sample(a, "a");
  check_sample(b, "b");
  std::vector<double> sa = a.values;
  std::vector<double> sb = b.values;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const std::size_t n = sa.size();
  const std::size_t m = sb.size();
  if (n == m) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(sa[i] - sb[i]);
    return s / static_cast<double>(n);
  }
  // Piecewise-constant quantile functions: integrate |F_a^-1 - F_b^-1| over
  // u in [0,1]. Breakpoint comparisons use the common denominator n*m so the
  // segment boundaries are exact.
  const double denom = static_cast<double>(n) * static_cast<double>(m);
  std::size_t i = 0, j = 0;
  std::uint64_t u_prev = 0;  // in units of 1/(n*m)
  double w = 0.0;
  while (i < n && j < m) {
    const std::uint64_t ua = static_cast<std::uint64_t>(i + 1) * m;
    const std::uint64_t ub = static_cast<std::uint64_t>(j + 1) * n;
    const std::uint64_t u_next = std::min(ua, ub);
    w += (static_cast<double>(u_next - u_prev) / denom) * std::abs(sa[i] - sb[j]);
    if (ua <= u_next) ++i;
    if (ub <= u_next) ++j;
    u_prev = u_next;
  }
  return w;
}

double mean_gap(const EmbeddingBatch& txt, const EmbeddingBatch& img) {
  if (txt.dim() != img.dim())
    throw Error(errc::dimension_mismatch, "mean_gap with dimensions " + std::to_string(txt.dim()) +
                                              " and " + std::to_string(img.dim()));
  if (txt.size() != img.size())
    throw Error(errc::dimension_mismatch, "mean_gap with batch sizes " +
                                              std::to_string(txt.size()) + " and " +
                                              std::to_string(img.size()));
  const auto mt = mean_embedding(txt);
  const auto mi = mean_embedding(img);
  double s = 0.0;
  for (std::size_t k = 0; k < mt.size(); ++k) s += (mt[k] - mi[k]) * (mt[k] - mi[k]);
  return std::sqrt(s);
}

AnchorDistributions per_anchor_distributions(const std::string& anchor_id,
                                             const std::vector<FineGrainedInstance>& dataset,
                                             const SimilarityScorer& scorer) {
  if (dataset.size() < 2)
    throw Error(errc::too_few_instances,
                "need at least 2 instances, got " + std::to_string(dataset.size()));
  bool known = false;
  for (const auto& inst : dataset)
    if (inst.t0 == anchor_id) known = true;
  if (!known) throw Error(errc::unknown_anchor, "anchor '" + anchor_id + "' is not a T0 member");

  AnchorDistributions out;
  for (const auto& inst : dataset) {
    out.cross_matched.values.push_back(scorer(anchor_id, inst.i0));
    out.cross_mismatched.values.push_back(scorer(anchor_id, inst.i1));
    if (inst.t0 != anchor_id) out.intra.values.push_back(scorer(anchor_id, inst.t0));
  }
  return out;
}

GapReport gap_report(const std::vector<FineGrainedInstance>& dataset,
                     const SimilarityScorer& scorer, const GapOptions& opts) {
  if (dataset.size() < 2)
    throw Error(errc::too_few_instances,
                "need at least 2 instances, got " + std::to_string(dataset.size()));

  GapReport report;
  report.n_anchors = dataset.size();
  if (opts.pooled) {
    SimilaritySample cross, intra, mismatched;
    for (const auto& a : dataset) {
      for (const auto& b : dataset) {
        cross.values.push_back(scorer(a.t0, b.i0));
        mismatched.values.push_back(scorer(a.t0, b.i1));
        if (a.t0 != b.t0) intra.values.push_back(scorer(a.t0, b.t0));
      }
    }
    report.w_dist_gap = wasserstein1(cross, intra);
    report.w_disc_gap = wasserstein1(cross, mismatched);
  } else {
    double dist_sum = 0.0;
    double disc_sum = 0.0;
    for (const auto& inst : dataset) {
      const auto d = per_anchor_distributions(inst.t0, dataset, scorer);
      dist_sum += wasserstein1(d.cross_matched, d.intra);
      disc_sum += wasserstein1(d.cross_matched, d.cross_mismatched);
    }
    report.w_dist_gap = dist_sum / static_cast<double>(dataset.size());
    report.w_disc_gap = disc_sum / static_cast<double>(dataset.size());
  }
  if (report.w_disc_gap > 0.0) report.delta_gap = report.w_dist_gap / report.w_disc_gap;
  return report;
}

std::vector<GapReport> gap_curve(const std::vector<SimilarityScorer>& scorers,
                                 const std::vector<FineGrainedInstance>& dataset,
                                 const GapOptions& opts) {
  std::vector<GapReport> out;
  out.reserve(scorers.size());
  for (const auto& s : scorers) out.push_back(gap_report(dataset, s, opts));
  return out;
}

SimilarityScorer embedding_scorer(std::map<std::string, EmbeddingVec> table) {
  auto shared = std::make_shared<std::map<std::string, EmbeddingVec>>(std::move(table));
  return [shared](const std::string& a, const std::string& b) {
    auto ia = shared->find(a);
    auto ib = shared->find(b);
    if (ia == shared->end()) throw Error(errc::missing_score, "no embedding for id '" + a + "'");
    if (ib == shared->end()) throw Error(errc::missing_score, "no embedding for id '" + b + "'");
    return cosine(ia->second, ib->second);
  };
}

}  // namespace prefalign
