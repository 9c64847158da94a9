#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prefalign/embed.hpp"
#include "prefalign/gap.hpp"
#include "prefalign/prefdata.hpp"
#include "prefalign/trainer.hpp"

namespace prefalign {

/// Ground-truth row tying a concept's text/image items together, with the
/// latent the planted judge scores and the planted near-duplicate ids.
struct TruthRecord {
  std::string concept_id;
  std::string text;
  std::string image;
  std::vector<std::string> near_dups;
  std::vector<double> latent;
};

struct EmbeddingFile {
  std::vector<EmbeddingVec> items;  ///< normalized on ingestion
  std::size_t renormalized = 0;     ///< rows whose norm deviated from 1 by > 1e-9
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_hash_hex(const std::filesystem::path& path);

// embeddings.jsonl: {"id": str, "modality": "text"|"image", "vec": [num]}
EmbeddingFile read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingVec>& items);

/// Split a mixed ingestion into (text batch, image batch), input order kept.
std::pair<EmbeddingBatch, EmbeddingBatch> split_modalities(std::vector<EmbeddingVec> items);

// instances.jsonl: {"t0": id, "t1": id, "i0": id, "i1": id}
std::vector<FineGrainedInstance> read_instances(const std::filesystem::path& path);
void write_instances(const std::filesystem::path& path,
                     const std::vector<FineGrainedInstance>& instances);

// candidates.jsonl: {"anchor": id, "direction": "txt2img"|"img2txt", "candidates": [ids]}
std::vector<CandidateSet> read_candidates(const std::filesystem::path& path);
void write_candidates(const std::filesystem::path& path, const std::vector<CandidateSet>& sets);

// truth.jsonl: {"concept": id, "text": id, "image": id, "near_dups": [ids], "latent": [num]}
std::vector<TruthRecord> read_truth(const std::filesystem::path& path);
void write_truth(const std::filesystem::path& path, const std::vector<TruthRecord>& records);

/// Alignment scores from a judge cache file, (anchor, candidate) -> alpha.
/// Duplicate keys: last record wins, matching the cache's own semantics.
std::map<std::pair<std::string, std::string>, double> read_score_map(
    const std::filesystem::path& path);

// multi-caption file: {"image": id, "captions": [text ids]}
std::map<std::string, std::vector<std::string>> read_multicaptions(
    const std::filesystem::path& path);

/// step,loss_total,loss_rpa,loss_contrast,tau,beta with %.17g values
/// (bit-faithful, byte-deterministic).
std::string metric_log_csv(const std::vector<StepMetrics>& log);

std::string gap_report_json(const GapReport& report);

}  // namespace prefalign
