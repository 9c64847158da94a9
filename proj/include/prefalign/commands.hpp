#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "prefalign/config.hpp"

namespace prefalign {

/// One experiment = one run directory. Every command reads only (config,
/// files), writes only into run_dir, and appends a manifest entry with input
/// and output content hashes.
struct RunContext {
  std::filesystem::path run_dir;
  ExperimentConfig cfg;
  bool quiet = false;
};

/// embeddings.jsonl + instances.jsonl + truth.jsonl from the synthetic world.
void cmd_synth(const RunContext& ctx);

/// Dedup the image gallery, mine hard negatives, emit candidates.jsonl and
/// dedup-report.json.
void cmd_prep(const RunContext& ctx);

/// Run the planted judge over every (anchor, candidate) pair, write-through
/// to the score cache.
void cmd_score(const RunContext& ctx);

/// Train per config; writes metrics.csv and checkpoints/epoch-NNNN.json
/// (epoch-0000 is the initial state).
void cmd_train(const RunContext& ctx);

/// Evaluate a checkpoint (empty = latest): Recall@k per direction plus the
/// fine-grained text/image scores. Writes eval-<label>.json.
void cmd_eval(const RunContext& ctx, const std::string& checkpoint = "");

/// Gap metrics with the checkpoint encoder as scorer, or over the raw
/// ingested embeddings when no checkpoint is named. Writes gap-<label>.json.
void cmd_gap(const RunContext& ctx, const std::string& checkpoint = "");

/// Full train+eval+gap per lambda; writes sweep.csv and sweep.json.
void cmd_sweep(const RunContext& ctx, const std::vector<double>& lambdas);

/// Assemble ablation tables and plot-data CSVs from the eval-*/gap-* files
/// already in the run directory.
void cmd_report(const RunContext& ctx, const std::string& baseline);

}  // namespace prefalign
