#pragma once

// Meta-testing engine: runs one head over E sampled episodes and aggregates
// per-episode accuracy into a mean with a 95% confidence interval.
//
// Episode i is sampled with derive_episode_seed(base_seed, i) and writes only
// slot i of the accuracy buffer, so results do not depend on worker count or
// scheduling.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fsk/embedding_store.hpp"
#include "fsk/episode_sampler.hpp"
#include "fsk/head_bdc.hpp"
#include "fsk/head_emd.hpp"
#include "fsk/head_laplacian.hpp"
#include "fsk/head_metric.hpp"
#include "fsk/rng.hpp"
#include "fsk/version.hpp"

namespace fsk {

enum class HeadKind { protonet, simpleshot, laplacianshot, deepemd, deepbdc };

inline constexpr HeadKind kAllHeads[] = {HeadKind::protonet, HeadKind::simpleshot, HeadKind::laplacianshot,
                                         HeadKind::deepemd, HeadKind::deepbdc};

inline std::string_view head_name(HeadKind head) {
  switch (head) {
    case HeadKind::protonet: return "protonet";
    case HeadKind::simpleshot: return "simpleshot";
    case HeadKind::laplacianshot: return "laplacianshot";
    case HeadKind::deepemd: return "deepemd";
    case HeadKind::deepbdc: return "deepbdc";
  }
  return "protonet";
}

inline std::optional<HeadKind> parse_head(std::string_view text) {
  for (auto h : kAllHeads)
    if (head_name(h) == text) return h;
  return std::nullopt;
}

/// Grid heads consume spatial feature maps; pooled data is treated as 1x1.
inline bool is_grid_head(HeadKind head) { return head == HeadKind::deepemd || head == HeadKind::deepbdc; }

struct HeadParams {
  double lambda = 1.0;
  std::size_t knn = 3;
  std::size_t max_iters = 20;
  double tol = 1e-6;
  double tau = 1.0;
  TransformKind transform = TransformKind::none;

  bool operator==(const HeadParams&) const = default;
};

struct RunConfig {
  HeadKind head = HeadKind::protonet;
  EpisodeSpec spec;
  std::size_t episodes = 5000;
  std::uint64_t base_seed = 0;
  HeadParams params;
  std::size_t workers = 1;

  void validate() const {
    spec.validate();
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) throw std::invalid_argument("lambda must be >= 0");
    if (params.knn < 1) throw std::invalid_argument("knn must be >= 1");
    if (params.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(params.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(params.tau > 0.0) || !std::isfinite(params.tau)) throw std::invalid_argument("tau must be > 0");
  }
};

struct BenchmarkResult {
  std::string dataset;
  HeadKind head = HeadKind::protonet;
  EpisodeSpec spec;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  HeadParams params;
  std::vector<double> per_episode_accuracy;
  double mean_accuracy = 0.0;
  double ci95_halfwidth = 0.0;
  double wall_time_seconds = 0.0;
  std::string version = kVersion;

  bool operator==(const BenchmarkResult&) const = default;
};

struct ConfidenceInterval {
  double mean = 0.0;
  double halfwidth = 0.0;
};

/// Mean and 1.96 * s / sqrt(n), with s the (n-1)-denominator standard
/// deviation; a single value has halfwidth 0.
inline ConfidenceInterval confidence_interval(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("confidence_interval of an empty list");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  ConfidenceInterval ci{sum / n, 0.0};
  if (values.size() == 1) return ci;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  ci.halfwidth = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return ci;
}

/// Pooled feature vector: the embedding itself for pooled data, the average
/// over spatial positions for grid data.
inline Vector pooled_vector(const EmbeddingRecord& record, const EmbeddingShape& shape) {
  const auto channels = static_cast<Eigen::Index>(shape.dim);
  Vector v = Vector::Zero(channels);
  const std::size_t positions = shape.positions();
  for (std::size_t p = 0; p < positions; ++p)
    for (Eigen::Index c = 0; c < channels; ++c)
      v(c) += static_cast<double>(record.embedding[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)]);
  if (positions > 1) v /= static_cast<double>(positions);
  return v;
}

inline Vector dataset_mean(const EmbeddingDataset& dataset) {
  Vector sum = Vector::Zero(dataset.shape.dim);
  for (const auto& rec : dataset.items) sum += pooled_vector(rec, dataset.shape);
  if (!dataset.items.empty()) sum /= static_cast<double>(dataset.items.size());
  return sum;
}

/// Throws DataError when `dataset` cannot be used with `head`.
inline void check_compatibility(const EmbeddingDataset& dataset, HeadKind head) {
  if (head == HeadKind::deepbdc && dataset.shape.dim < 2)
    throw DataError("incompatible shape: deepbdc needs at least 2 channels, dataset has " +
                    std::to_string(dataset.shape.dim));
}

/// Fraction of the episode's queries the configured head classifies
/// correctly. `base_mean` is used by the centering transforms.
inline double episode_accuracy(const EmbeddingDataset& dataset, const Episode& episode, const RunConfig& config,
                               const std::optional<Vector>& base_mean = std::nullopt) {
  const std::size_t ways = episode.ways();
  std::vector<std::size_t> predictions;
  predictions.reserve(episode.query.size());

  if (!is_grid_head(config.head)) {
    SlotGroups support(ways);
    for (const auto& item : episode.support)
      support[item.slot].push_back(pooled_vector(dataset.items[item.record], dataset.shape));
    std::vector<Vector> queries;
    queries.reserve(episode.query.size());
    for (const auto& item : episode.query) queries.push_back(pooled_vector(dataset.items[item.record], dataset.shape));

    switch (config.head) {
      case HeadKind::protonet: {
        const auto protos = compute_prototypes(support);
        for (const auto& q : queries) predictions.push_back(classify_protonet(protos, q).argmax());
        break;
      }
      case HeadKind::simpleshot: {
        const NearestMeanClassifier clf(support, FeatureTransform{config.params.transform, base_mean});
        for (const auto& q : queries) predictions.push_back(clf.predict(q));
        break;
      }
      case HeadKind::laplacianshot: {
        const LaplacianConfig lc{config.params.lambda, config.params.knn, config.params.max_iters, config.params.tol};
        predictions = laplacian_infer(compute_prototypes(support), queries, lc).predictions;
        break;
      }
      default: break;
    }
  } else {
    auto grid_of = [&](const EpisodeItem& item) {
      return FeatureGrid::from_embedding(dataset.items[item.record].embedding, dataset.shape);
    };
    if (config.head == HeadKind::deepemd) {
      GridGroups support(ways);
      for (const auto& item : episode.support) support[item.slot].push_back(grid_of(item));
      const EmdClassifier clf(support);
      for (const auto& item : episode.query) predictions.push_back(clf.predict(grid_of(item)));
    } else {
      std::vector<std::vector<BdcMatrix>> support(ways);
      for (const auto& item : episode.support) support[item.slot].push_back(bdc_matrix(grid_of(item)));
      const auto protos = bdc_prototypes(support);
      for (const auto& item : episode.query)
        predictions.push_back(classify_bdc(protos, bdc_matrix(grid_of(item)), config.params.tau).argmax());
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < episode.query.size(); ++i)
    if (predictions[i] == episode.query[i].slot) ++correct;
  return static_cast<double>(correct) / static_cast<double>(episode.query.size());
}

inline BenchmarkResult run_benchmark(const EmbeddingDataset& dataset, const RunConfig& config) {
  config.validate();
  check_compatibility(dataset, config.head);
  const auto start = std::chrono::steady_clock::now();
  const ClassIndex index = build_class_index(dataset);
  if (eligible_classes(index, config.spec).size() < config.spec.ways)
    sample_episode(dataset, index, config.spec, config.base_seed);  // throws with the deficient classes

  std::optional<Vector> base_mean;
  if (config.params.transform == TransformKind::center || config.params.transform == TransformKind::center_then_l2)
    base_mean = dataset_mean(dataset);

  BenchmarkResult result;
  result.dataset = dataset.name;
  result.head = config.head;
  result.spec = config.spec;
  result.episodes = config.episodes;
  result.seed = config.base_seed;
  result.params = config.params;
  result.per_episode_accuracy.assign(config.episodes, 0.0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t e = next.fetch_add(1);
      if (e >= config.episodes) return;
      try {
        const Episode ep = sample_episode(dataset, index, config.spec, derive_episode_seed(config.base_seed, e));
        result.per_episode_accuracy[e] = episode_accuracy(dataset, ep, config, base_mean);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(config.episodes);
        return;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, config.episodes);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  const auto ci = confidence_interval(result.per_episode_accuracy);
  result.mean_accuracy = ci.mean;
  result.ci95_halfwidth = ci.halfwidth;
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace fsk
