#include "prefalign/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "prefalign/error.hpp"
#include "prefalign/hash.hpp"

namespace prefalign {
namespace {

using nlohmann::json;

/// Parse one JSONL line, with path:lineno context on failure.
json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(errc::io_error,
                path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
  return j;
}

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fn(parse_line(line, path, lineno), lineno);
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::filesystem::path& path,
            std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end())
    throw Error(errc::io_error, path.string() + ":" + std::to_string(lineno) +
                                    ": missing field '" + std::string(key) + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(errc::io_error, path.string() + ":" + std::to_string(lineno) +
                                    ": field '" + std::string(key) + "' has the wrong type");
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_for_write(path);
  out << content;
  if (!out) throw Error(errc::io_error, "short write to " + path.string());
}

std::string file_hash_hex(const std::filesystem::path& path) {
  std::uint64_t h = fnv1a64(read_text_file(path));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) {
  EmbeddingFile file;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    EmbeddingVec vec;
    vec.id = get_field<std::string>(j, "id", path, lineno);
    vec.modality = modality_from_string(get_field<std::string>(j, "modality", path, lineno));
    vec.values = get_field<std::vector<double>>(j, "vec", path, lineno);
    try {
      if (std::abs(norm(vec.values) - 1.0) > 1e-9) ++file.renormalized;
      vec.values = normalize(vec.values);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + " ('" + vec.id +
                                "'): " + e.what());
    }
    file.items.push_back(std::move(vec));
  });
  if (file.items.empty()) throw Error(errc::io_error, path.string() + ": no embeddings");
  return file;
}

void write_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingVec>& items) {
  auto out = open_for_write(path);
  for (const auto& item : items) {
    json j{{"id", item.id}, {"modality", to_string(item.modality)}, {"vec", item.values}};
    out << j.dump() << "\n";
  }
}

std::pair<EmbeddingBatch, EmbeddingBatch> split_modalities(std::vector<EmbeddingVec> items) {
  std::vector<EmbeddingVec> text, image;
  for (auto& item : items)
    (item.modality == Modality::text ? text : image).push_back(std::move(item));
  if (text.empty() || image.empty())
    throw Error(errc::empty_batch, "need at least one embedding per modality");
  return {EmbeddingBatch(std::move(text)), EmbeddingBatch(std::move(image))};
}

std::vector<FineGrainedInstance> read_instances(const std::filesystem::path& path) {
  std::vector<FineGrainedInstance> out;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    out.push_back({get_field<std::string>(j, "t0", path, lineno),
                   get_field<std::string>(j, "t1", path, lineno),
                   get_field<std::string>(j, "i0", path, lineno),
                   get_field<std::string>(j, "i1", path, lineno)});
  });
  return out;
}

void write_instances(const std::filesystem::path& path,
                     const std::vector<FineGrainedInstance>& instances) {
  auto out = open_for_write(path);
  for (const auto& inst : instances) {
    json j{{"t0", inst.t0}, {"t1", inst.t1}, {"i0", inst.i0}, {"i1", inst.i1}};
    out << j.dump() << "\n";
  }
}

std::vector<CandidateSet> read_candidates(const std::filesystem::path& path) {
  std::vector<CandidateSet> out;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    CandidateSet set;
    set.anchor_id = get_field<std::string>(j, "anchor", path, lineno);
    set.direction = direction_from_string(get_field<std::string>(j, "direction", path, lineno));
    set.candidate_ids = get_field<std::vector<std::string>>(j, "candidates", path, lineno);
    out.push_back(std::move(set));
  });
  return out;
}

void write_candidates(const std::filesystem::path& path, const std::vector<CandidateSet>& sets) {
  auto out = open_for_write(path);
  for (const auto& set : sets) {
    json j{{"anchor", set.anchor_id},
           {"direction", to_string(set.direction)},
           {"candidates", set.candidate_ids}};
    out << j.dump() << "\n";
  }
}

std::vector<TruthRecord> read_truth(const std::filesystem::path& path) {
  std::vector<TruthRecord> out;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    TruthRecord rec;
    rec.concept_id = get_field<std::string>(j, "concept", path, lineno);
    rec.text = get_field<std::string>(j, "text", path, lineno);
    rec.image = get_field<std::string>(j, "image", path, lineno);
    rec.near_dups = get_field<std::vector<std::string>>(j, "near_dups", path, lineno);
    rec.latent = get_field<std::vector<double>>(j, "latent", path, lineno);
    out.push_back(std::move(rec));
  });
  return out;
}

void write_truth(const std::filesystem::path& path, const std::vector<TruthRecord>& records) {
  auto out = open_for_write(path);
  for (const auto& rec : records) {
    json j{{"concept", rec.concept_id},
           {"text", rec.text},
           {"image", rec.image},
           {"near_dups", rec.near_dups},
           {"latent", rec.latent}};
    out << j.dump() << "\n";
  }
}

std::map<std::pair<std::string, std::string>, double> read_score_map(
    const std::filesystem::path& path) {
  std::map<std::pair<std::string, std::string>, double> out;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    JudgeLogits logits{get_field<double>(j, "l_yes", path, lineno),
                       get_field<double>(j, "l_no", path, lineno)};
    out[{get_field<std::string>(j, "anchor", path, lineno),
         get_field<std::string>(j, "candidate", path, lineno)}] = score_from_logits(logits).value;
  });
  return out;
}

std::map<std::string, std::vector<std::string>> read_multicaptions(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  for_each_jsonl(path, [&](const json& j, std::size_t lineno) {
    out[get_field<std::string>(j, "image", path, lineno)] =
        get_field<std::vector<std::string>>(j, "captions", path, lineno);
  });
  return out;
}

std::string metric_log_csv(const std::vector<StepMetrics>& log) {
  std::string out = "step,loss_total,loss_rpa,loss_contrast,tau,beta\n";
  char buf[160];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.step,
                  row.loss_total, row.loss_rpa, row.loss_contrast, row.tau, row.beta);
    out += buf;
  }
  return out;
}

std::string gap_report_json(const GapReport& report) {
  json j{{"w_dist_gap", report.w_dist_gap},
         {"w_disc_gap", report.w_disc_gap},
         {"delta_defined", report.delta_gap.has_value()},
         {"n_anchors", report.n_anchors}};
  if (report.delta_gap)
    j["delta_gap"] = *report.delta_gap;
  else
    j["delta_gap"] = nullptr;
  return j.dump(2);
}

}  // namespace prefalign
