#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prefalign/embed.hpp"
#include "prefalign/gap.hpp"

namespace prefalign {

struct WorldConfig {
  std::size_t n_concepts = 512;
  std::size_t latent_dim = 16;
  std::size_t raw_dim = 32;
  double view_noise = 0.05;
  double duplicate_fraction = 0.25;
  double near_dup_cosine = 0.95;
  std::uint64_t seed = 0;
  /// Skip the seeded view maps and use the identity (needs raw_dim ==
  /// latent_dim). Collapses the modality gap to zero at view_noise = 0.
  bool identity_views = false;
};

void validate(const WorldConfig& cfg);

struct WorldItem {
  std::string concept_id;
  std::vector<double> latent;     ///< unit norm
  std::vector<double> raw_text;   ///< A_t . latent + noise
  std::vector<double> raw_image;  ///< A_i . latent + noise
  std::vector<std::string> hard_neighbor_ids;
};

/// Deterministic function of its config: same cfg, same world.
struct World {
  WorldConfig cfg;
  std::vector<WorldItem> items;  ///< ordered by concept id
  /// Planted (base, near-duplicate) concept-id pairs, creation order.
  std::vector<std::pair<std::string, std::string>> dup_pairs;
};

/// Item ids are derived from the concept id so text and image rows never
/// collide in a shared file.
std::string text_id(const std::string& concept_id);
std::string image_id(const std::string& concept_id);

World generate_world(const WorldConfig& cfg);

/// Raw (unnormalized) views as batches, concept order preserved.
EmbeddingBatch raw_text_batch(const World& world);
EmbeddingBatch raw_image_batch(const World& world);

/// Ground-truth latents keyed by derived item id (both the text and the image
/// id of a concept map to its latent). This is what the planted judge sees.
std::map<std::string, std::vector<double>> latents_by_item_id(const World& world);

/// Each instance pairs a planted (base, near-duplicate) concept pair:
/// (t0, i0) from the base, (t1, i1) from the duplicate. Seeded subset of the
/// planted pairs, emitted in ascending id order.
std::vector<FineGrainedInstance> make_finegrained_benchmark(const World& world,
                                                            std::size_t n_instances,
                                                            std::uint64_t seed);

}  // namespace prefalign
