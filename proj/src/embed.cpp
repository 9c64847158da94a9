#include "prefalign/embed.hpp"

#include <algorithm>
#include <cmath>

namespace prefalign {

const char* to_string(Modality m) { return m == Modality::text ? "text" : "image"; }

Modality modality_from_string(const std::string& s) {
  if (s == "text") return Modality::text;
  if (s == "image") return Modality::image;
  throw Error(errc::config_invalid, "unknown modality '" + s + "'");
}

EmbeddingBatch::EmbeddingBatch(std::vector<EmbeddingVec> items) : items_(std::move(items)) {
  if (items_.empty()) throw Error(errc::empty_batch, "embedding batch must be non-empty");
  const std::size_t d = items_.front().values.size();
  const Modality m = items_.front().modality;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& it = items_[i];
    if (it.values.size() != d)
      throw Error(errc::dimension_mismatch,
                  "item '" + it.id + "' has dimension " + std::to_string(it.values.size()) +
                      ", expected " + std::to_string(d));
    if (it.modality != m)
      throw Error(errc::dimension_mismatch, "item '" + it.id + "' has mixed modality");
    for (double x : it.values)
      if (!std::isfinite(x))
        throw Error(errc::dimension_mismatch, "item '" + it.id + "' has non-finite entries");
    if (!index_.emplace(it.id, i).second)
      throw Error(errc::dimension_mismatch, "duplicate id '" + it.id + "' in batch");
  }
}

std::optional<std::size_t> EmbeddingBatch::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(errc::dimension_mismatch, "dot of vectors with dimensions " +
                                              std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()));
  double s = 0.0;  // sequential left-to-right for determinism
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::vector<double> normalize(std::span<const double> v) {
  const double n = norm(v);
  if (n <= 1e-12) throw Error(errc::zero_vector, "cannot normalize a (near-)zero vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

double cosine(const EmbeddingVec& a, const EmbeddingVec& b) {
  const double d = dot(a.values, b.values);
  return std::clamp(d, -1.0, 1.0);
}

double cosine_values(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na <= 1e-12 || nb <= 1e-12)
    throw Error(errc::zero_vector, "cosine of a (near-)zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<std::vector<double>> similarity_matrix(const EmbeddingBatch& a,
                                                   const EmbeddingBatch& b) {
  if (a.dim() != b.dim())
    throw Error(errc::dimension_mismatch, "similarity_matrix with dimensions " +
                                              std::to_string(a.dim()) + " and " +
                                              std::to_string(b.dim()));
  std::vector<std::vector<double>> m(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m[i][j] = cosine(a[i], b[j]);
  return m;
}

std::vector<double> mean_embedding(const EmbeddingBatch& batch) {
  std::vector<double> mu(batch.dim(), 0.0);
  for (const auto& item : batch.items())
    for (std::size_t k = 0; k < mu.size(); ++k) mu[k] += item.values[k];
  for (double& x : mu) x /= static_cast<double>(batch.size());
  return mu;
}

}  // namespace prefalign
