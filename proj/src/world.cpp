#include "prefalign/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "prefalign/error.hpp"
#include "prefalign/rng.hpp"

namespace prefalign {
namespace {

// rows x cols map with orthonormal columns (Gram-Schmidt, run twice for
// numerical insurance). Orthonormal columns preserve latent dot products.
std::vector<std::vector<double>> orthonormal_map(std::mt19937_64& rng, std::size_t rows,
                                                 std::size_t cols) {
  std::vector<std::vector<double>> basis(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    auto v = gaussian_vec(rng, rows);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t p = 0; p < c; ++p) {
        double proj = dot(v, basis[p]);
        for (std::size_t r = 0; r < rows; ++r) v[r] -= proj * basis[p][r];
      }
    basis[c] = normalize(v);
  }
  // Stored column-major above; return row-major for mat-vec use.
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m[r][c] = basis[c][r];
  return m;
}

std::vector<double> mat_vec(const std::vector<std::vector<double>>& m,
                            const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
  return out;
}

std::string concept_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%04zu", index);
  return buf;
}

}  // namespace

void validate(const WorldConfig& cfg) {
  if (cfg.n_concepts == 0) throw Error(errc::config_invalid, "world.n_concepts must be positive");
  if (cfg.latent_dim == 0) throw Error(errc::config_invalid, "world.latent_dim must be positive");
  if (cfg.raw_dim < cfg.latent_dim)
    throw Error(errc::config_invalid, "world.raw_dim must be >= world.latent_dim");
  if (!(cfg.view_noise >= 0.0))
    throw Error(errc::config_invalid, "world.view_noise must be >= 0");
  if (!(cfg.duplicate_fraction >= 0.0 && cfg.duplicate_fraction <= 1.0))
    throw Error(errc::config_invalid, "world.duplicate_fraction must lie in [0, 1]");
  if (!(cfg.near_dup_cosine > 0.0 && cfg.near_dup_cosine < 1.0))
    throw Error(errc::config_invalid, "world.near_dup_cosine must lie in (0, 1)");
  if (cfg.identity_views && cfg.raw_dim != cfg.latent_dim)
    throw Error(errc::config_invalid, "world.identity_views requires raw_dim == latent_dim");
  std::size_t n_dup = static_cast<std::size_t>(cfg.duplicate_fraction *
                                               static_cast<double>(cfg.n_concepts));
  if (n_dup >= cfg.n_concepts && n_dup > 0)
    throw Error(errc::config_invalid, "world.duplicate_fraction leaves no base concepts");
}

std::string text_id(const std::string& concept_id) { return concept_id + "_t"; }
std::string image_id(const std::string& concept_id) { return concept_id + "_i"; }

World generate_world(const WorldConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);

  const std::size_t n = cfg.n_concepts;
  const std::size_t n_dup =
      static_cast<std::size_t>(cfg.duplicate_fraction * static_cast<double>(n));
  const std::size_t n_base = n - n_dup;

  std::vector<std::vector<double>> map_t, map_i;
  if (!cfg.identity_views) {
    map_t = orthonormal_map(rng, cfg.raw_dim, cfg.latent_dim);
    map_i = orthonormal_map(rng, cfg.raw_dim, cfg.latent_dim);
  }

  World world;
  world.cfg = cfg;
  world.items.resize(n);

  // Latents first: bases are random unit vectors; each duplicate sits at
  // exactly near_dup_cosine from its base (base index round-robin).
  for (std::size_t c = 0; c < n; ++c) {
    auto& item = world.items[c];
    item.concept_id = concept_id(c);
    if (c < n_base) {
      item.latent = normalize(gaussian_vec(rng, cfg.latent_dim));
    } else {
      const std::size_t base = (c - n_base) % n_base;
      const auto& u = world.items[base].latent;
      // v = cos * u + sin * w with w a unit vector orthogonal to u.
      auto w = gaussian_vec(rng, cfg.latent_dim);
      double proj = dot(w, u);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= proj * u[k];
      w = normalize(w);
      double s = std::sqrt(1.0 - cfg.near_dup_cosine * cfg.near_dup_cosine);
      item.latent.resize(cfg.latent_dim);
      for (std::size_t k = 0; k < w.size(); ++k)
        item.latent[k] = cfg.near_dup_cosine * u[k] + s * w[k];
      item.hard_neighbor_ids.push_back(world.items[base].concept_id);
      world.items[base].hard_neighbor_ids.push_back(item.concept_id);
      world.dup_pairs.emplace_back(world.items[base].concept_id, item.concept_id);
    }
  }

  for (auto& item : world.items) {
    item.raw_text = cfg.identity_views ? item.latent : mat_vec(map_t, item.latent);
    item.raw_image = cfg.identity_views ? item.latent : mat_vec(map_i, item.latent);
    if (cfg.view_noise > 0.0) {
      for (auto& x : item.raw_text) x += cfg.view_noise * gaussian(rng);
      for (auto& x : item.raw_image) x += cfg.view_noise * gaussian(rng);
    }
  }
  return world;
}

EmbeddingBatch raw_text_batch(const World& world) {
  std::vector<EmbeddingVec> items;
  items.reserve(world.items.size());
  for (const auto& item : world.items)
    items.push_back({text_id(item.concept_id), Modality::text, item.raw_text});
  return EmbeddingBatch(std::move(items));
}

EmbeddingBatch raw_image_batch(const World& world) {
  std::vector<EmbeddingVec> items;
  items.reserve(world.items.size());
  for (const auto& item : world.items)
    items.push_back({image_id(item.concept_id), Modality::image, item.raw_image});
  return EmbeddingBatch(std::move(items));
}

std::map<std::string, std::vector<double>> latents_by_item_id(const World& world) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& item : world.items) {
    out[text_id(item.concept_id)] = item.latent;
    out[image_id(item.concept_id)] = item.latent;
  }
  return out;
}

std::vector<FineGrainedInstance> make_finegrained_benchmark(const World& world,
                                                            std::size_t n_instances,
                                                            std::uint64_t seed) {
  if (n_instances > world.dup_pairs.size())
    throw Error(errc::not_enough_duplicate_pairs,
                "requested " + std::to_string(n_instances) + " instances but only " +
                    std::to_string(world.dup_pairs.size()) + " planted pairs exist");

  // Seeded Fisher-Yates prefix, then canonical ascending order.
  std::vector<std::size_t> order(world.dup_pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(n_instances);
  std::sort(order.begin(), order.end());

  std::vector<FineGrainedInstance> out;
  out.reserve(n_instances);
  for (std::size_t idx : order) {
    const auto& [a, b] = world.dup_pairs[idx];
    out.push_back({text_id(a), text_id(b), image_id(a), image_id(b)});
  }
  return out;
}

}  // namespace prefalign
