#include "prefalign/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "prefalign/error.hpp"

namespace prefalign {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

double recall_at_k(const EmbeddingBatch& queries, const EmbeddingBatch& gallery,
                   const std::map<std::string, std::string>& truth, std::size_t k) {
  if (k == 0 || k > gallery.size())
    throw Error(errc::k_too_large, "k = " + std::to_string(k) + " with gallery size " +
                                       std::to_string(gallery.size()));
  if (queries.dim() != gallery.dim())
    throw Error(errc::dimension_mismatch, "query dim " + std::to_string(queries.dim()) +
                                              " vs gallery dim " + std::to_string(gallery.dim()));

  std::size_t hits = 0;
  std::vector<std::size_t> order(gallery.size());
  for (const auto& q : queries.items()) {
    auto t = truth.find(q.id);
    if (t == truth.end())
      throw Error(errc::missing_truth, "no truth entry for query '" + q.id + "'");
    auto target = gallery.index_of(t->second);
    if (!target)
      throw Error(errc::missing_truth,
                  "truth item '" + t->second + "' for query '" + q.id + "' not in gallery");

    std::vector<double> sim(gallery.size());
    for (std::size_t j = 0; j < gallery.size(); ++j) sim[j] = cosine(q, gallery[j]);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (sim[a] != sim[b]) return sim[a] > sim[b];
      return gallery[a].id < gallery[b].id;
    });
    for (std::size_t rank = 0; rank < k; ++rank)
      if (order[rank] == *target) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

EvalResult winoground_scores(const std::vector<FineGrainedInstance>& instances,
                             const SimilarityScorer& scorer) {
  if (instances.empty()) throw Error(errc::empty_batch, "no instances to evaluate");
  EvalResult result;
  result.per_instance.reserve(instances.size());
  double text_sum = 0.0, image_sum = 0.0;
  for (const auto& inst : instances) {
    bool image_ok = scorer(inst.t0, inst.i0) > scorer(inst.t0, inst.i1) &&
                    scorer(inst.t1, inst.i1) > scorer(inst.t1, inst.i0);
    bool text_ok = scorer(inst.i0, inst.t0) > scorer(inst.i0, inst.t1) &&
                   scorer(inst.i1, inst.t1) > scorer(inst.i1, inst.t0);
    result.per_instance.emplace_back(text_ok, image_ok);
    text_sum += text_ok ? 1.0 : 0.0;
    image_sum += image_ok ? 1.0 : 0.0;
  }
  result.text_score = text_sum / static_cast<double>(instances.size());
  result.image_score = image_sum / static_cast<double>(instances.size());
  return result;
}

AblationReport ablation_report(const std::map<std::string, RunSummary>& runs,
                               const std::string& baseline) {
  if (runs.size() < 2)
    throw Error(errc::config_invalid, "ablation comparison needs at least 2 runs");
  auto base_it = runs.find(baseline);
  if (base_it == runs.end())
    throw Error(errc::missing_baseline, "no run named '" + baseline + "'");

  AblationReport report;
  report.baseline = baseline;
  report.row_order.push_back(baseline);
  for (const auto& [name, _] : runs)
    if (name != baseline) report.row_order.push_back(name);

  auto collect = [](const RunSummary& run) {
    std::map<std::string, double> m;
    m["text_score"] = run.eval.text_score;
    m["image_score"] = run.eval.image_score;
    m["finegrained_mean"] = 0.5 * (run.eval.text_score + run.eval.image_score);
    for (const auto& [k, v] : run.eval.recall_at) m["recall@" + std::to_string(k)] = v;
    m["w_dist_gap"] = run.gap.w_dist_gap;
    m["w_disc_gap"] = run.gap.w_disc_gap;
    if (run.gap.delta_gap) m["delta_gap"] = *run.gap.delta_gap;
    return m;
  };
  const auto base_metrics = collect(base_it->second);
  for (const auto& name : report.row_order) {
    auto m = collect(runs.at(name));
    for (const auto& [metric, value] : m) {
      report.metrics[metric][name] = value;
      auto b = base_metrics.find(metric);
      if (b != base_metrics.end()) report.deltas[metric][name] = value - b->second;
    }
  }

  // Column order: metrics sorted by name (std::map), rows baseline-first.
  std::vector<std::string> cols;
  for (const auto& [metric, _] : report.metrics) cols.push_back(metric);

  std::string csv = "run";
  for (const auto& c : cols) csv += "," + c + "," + c + "_delta";
  csv += "\n";
  for (const auto& name : report.row_order) {
    csv += name;
    for (const auto& c : cols) {
      auto& per_run = report.metrics.at(c);
      auto it = per_run.find(name);
      csv += ",";
      if (it != per_run.end()) csv += fmt(it->second);
      csv += ",";
      auto& dd = report.deltas.at(c);
      auto dit = dd.find(name);
      if (dit != dd.end()) csv += fmt(dit->second);
    }
    csv += "\n";
  }
  report.csv = std::move(csv);

  std::size_t name_w = 3;
  for (const auto& name : report.row_order) name_w = std::max(name_w, name.size());
  std::string table = std::string("run") + std::string(name_w - 3, ' ');
  for (const auto& c : cols) {
    std::size_t w = std::max<std::size_t>(c.size(), 16);
    table += "  " + std::string(w - c.size(), ' ') + c;
  }
  table += "\n";
  for (const auto& name : report.row_order) {
    table += name + std::string(name_w - name.size(), ' ');
    for (const auto& c : cols) {
      std::size_t w = std::max<std::size_t>(c.size(), 16);
      std::string cell = "-";
      auto it = report.metrics.at(c).find(name);
      if (it != report.metrics.at(c).end()) {
        cell = fmt(it->second);
        auto dit = report.deltas.at(c).find(name);
        if (dit != report.deltas.at(c).end() && name != baseline)
          cell += " (" + std::string(dit->second >= 0 ? "+" : "") + fmt(dit->second) + ")";
      }
      table += "  " + std::string(w > cell.size() ? w - cell.size() : 0, ' ') + cell;
    }
    table += "\n";
  }
  report.table = std::move(table);

  nlohmann::json j;
  j["baseline"] = baseline;
  for (const auto& name : report.row_order) {
    nlohmann::json entry;
    for (const auto& c : cols) {
      auto it = report.metrics.at(c).find(name);
      if (it == report.metrics.at(c).end()) continue;
      entry["metrics"][c] = it->second;
      auto dit = report.deltas.at(c).find(name);
      if (dit != report.deltas.at(c).end()) entry["deltas"][c] = dit->second;
    }
    j["runs"][name] = std::move(entry);
  }
  report.json = j.dump(2);
  return report;
}

}  // namespace prefalign
