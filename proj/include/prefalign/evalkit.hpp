#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prefalign/embed.hpp"
#include "prefalign/gap.hpp"

namespace prefalign {

struct EvalResult {
  std::map<std::size_t, double> recall_at;
  double text_score = 0.0;
  double image_score = 0.0;
  /// (text_correct, image_correct) per instance, input order.
  std::vector<std::pair<bool, bool>> per_instance;
};

/// Fraction of queries whose true gallery item lands in the top k by cosine.
/// Ties break by ascending gallery id.
double recall_at_k(const EmbeddingBatch& queries, const EmbeddingBatch& gallery,
                   const std::map<std::string, std::string>& truth, std::size_t k);

/// Conjunctive correctness over both pairings of each two-pair instance;
/// strict inequalities, so ties score as incorrect.
///   image_correct = s(t0,i0) > s(t0,i1) and s(t1,i1) > s(t1,i0)
///   text_correct  = s(i0,t0) > s(i0,t1) and s(i1,t1) > s(i1,t0)
EvalResult winoground_scores(const std::vector<FineGrainedInstance>& instances,
                             const SimilarityScorer& scorer);

struct RunSummary {
  EvalResult eval;
  GapReport gap;
};

struct AblationReport {
  std::string baseline;
  std::vector<std::string> row_order;  ///< baseline first, then ascending
  /// metric -> run -> value; deltas are value - baseline value.
  std::map<std::string, std::map<std::string, double>> metrics;
  std::map<std::string, std::map<std::string, double>> deltas;
  std::string table;  ///< aligned text rendering
  std::string csv;
  std::string json;
};

/// Per-metric deltas of every run against runs[baseline].
AblationReport ablation_report(const std::map<std::string, RunSummary>& runs,
                               const std::string& baseline);

}  // namespace prefalign
