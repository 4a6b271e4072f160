#pragma once

// Deterministic synthetic embedding datasets for fixtures, the selftest and
// the acceptance suite.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fsk/embedding_store.hpp"
#include "fsk/head_bdc.hpp"
#include "fsk/rng.hpp"

namespace fsk {

struct GaussianDatasetSpec {
  std::uint32_t classes = 20;
  std::uint32_t per_class = 40;
  EmbeddingShape shape = EmbeddingShape::pooled(64);
  // Expected distance between two class means, as a multiple of the RMS
  // distance of a sample from its own class mean (sigma * sqrt(D)).
  double separation = 5.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  std::string name = "synthetic";
};

/// Isotropic Gaussian classes. Every entry of a class mean is
/// N(0, (separation * sigma)^2 / 2), so E|mu_a - mu_b|^2 = separation^2 *
/// sigma^2 * D, and samples are mean + N(0, sigma^2) per entry.
inline EmbeddingDataset make_gaussian_dataset(const GaussianDatasetSpec& spec) {
  validate_shape(spec.shape);
  Xoshiro256 rng(spec.seed);
  const std::size_t dim = spec.shape.size();
  const double mean_scale = spec.separation * spec.sigma / std::sqrt(2.0);
  EmbeddingDataset ds;
  ds.name = spec.name;
  ds.shape = spec.shape;
  std::vector<double> mean(dim);
  std::uint64_t id = 0;
  for (std::uint32_t c = 0; c < spec.classes; ++c) {
    ds.class_names.push_back("class_" + std::to_string(c));
    for (auto& m : mean) m = mean_scale * rng.normal();
    for (std::uint32_t i = 0; i < spec.per_class; ++i) {
      EmbeddingRecord rec{id++, c, std::vector<float>(dim)};
      for (std::size_t d = 0; d < dim; ++d) rec.embedding[d] = static_cast<float>(mean[d] + spec.sigma * rng.normal());
      ds.items.push_back(std::move(rec));
    }
  }
  return ds;
}

/// Every record of a class is the same point. Points are scaled so their
/// BDC matrices have unit Frobenius norm, which makes each class its own
/// unique best match for every head.
inline EmbeddingDataset make_point_dataset(std::uint32_t classes, std::uint32_t per_class, EmbeddingShape shape,
                                           std::uint64_t seed, std::string name = "points") {
  validate_shape(shape);
  Xoshiro256 rng(seed);
  EmbeddingDataset ds;
  ds.name = std::move(name);
  ds.shape = shape;
  std::uint64_t id = 0;
  for (std::uint32_t c = 0; c < classes; ++c) {
    ds.class_names.push_back("point_" + std::to_string(c));
    std::vector<float> point(shape.size());
    for (auto& v : point) v = static_cast<float>(rng.normal());
    if (shape.dim >= 2) {
      const double norm = bdc_matrix(FeatureGrid::from_embedding(point, shape)).values.norm();
      if (norm > 0.0)
        for (auto& v : point) v = static_cast<float>(v / norm);
    }
    for (std::uint32_t i = 0; i < per_class; ++i) ds.items.push_back({id++, c, point});
  }
  return ds;
}

/// Randomly permutes labels across records, making them independent of the
/// embeddings while keeping class sizes.
inline EmbeddingDataset shuffle_labels(EmbeddingDataset ds, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<std::uint32_t> labels;
  labels.reserve(ds.items.size());
  for (const auto& r : ds.items) labels.push_back(r.label);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  for (std::size_t i = 0; i < ds.items.size(); ++i) ds.items[i].label = labels[i];
  ds.name += "_shuffled";
  return ds;
}

}  // namespace fsk
