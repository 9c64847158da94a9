#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefalign/error.hpp"

namespace prefalign {

enum class Modality { text, image };

const char* to_string(Modality m);
Modality modality_from_string(const std::string& s);

/// A unit-norm embedding with an id and a modality tag.
struct EmbeddingVec {
  std::string id;
  Modality modality = Modality::text;
  std::vector<double> values;
};

/// Ordered, non-empty collection of embeddings with uniform dimension and
/// modality and unique ids. Validated on construction.
class EmbeddingBatch {
 public:
  explicit EmbeddingBatch(std::vector<EmbeddingVec> items);

  const std::vector<EmbeddingVec>& items() const { return items_; }
  const EmbeddingVec& operator[](std::size_t i) const { return items_[i]; }
  std::size_t size() const { return items_.size(); }
  std::size_t dim() const { return items_.front().values.size(); }
  Modality modality() const { return items_.front().modality; }

  std::optional<std::size_t> index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_of(id).has_value(); }

 private:
  std::vector<EmbeddingVec> items_;
  std::map<std::string, std::size_t> index_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// v / ||v||. Throws ZeroVector when ||v|| <= 1e-12.
std::vector<double> normalize(std::span<const double> v);

/// Dot product of already-normalized embeddings, clamped to [-1, 1].
double cosine(const EmbeddingVec& a, const EmbeddingVec& b);

/// Cosine of raw (not necessarily normalized) vectors.
double cosine_values(std::span<const double> a, std::span<const double> b);

/// Entry (i, j) = cosine(A_i, B_j).
std::vector<std::vector<double>> similarity_matrix(const EmbeddingBatch& a,
                                                   const EmbeddingBatch& b);

/// Arithmetic mean of the batch vectors; not renormalized.
std::vector<double> mean_embedding(const EmbeddingBatch& batch);

}  // namespace prefalign
