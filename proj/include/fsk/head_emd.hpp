#pragma once

// DeepEMD inference over dense feature grids. Node costs are cosine
// distances, node masses come from cross-reference weighting against the
// other image, and the similarity of two grids is sum_ij (1 - c_ij) x_ij for
// the optimal transport plan x between the normalized masses.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsk/embedding_store.hpp"
#include "fsk/head_metric.hpp"
#include "fsk/transport.hpp"

namespace fsk {

/// H*W node vectors (rows) of C channels (columns), in row-major position
/// order. A pooled embedding is a 1x1 grid.
struct FeatureGrid {
  Matrix nodes;

  std::size_t node_count() const { return static_cast<std::size_t>(nodes.rows()); }
  std::size_t channels() const { return static_cast<std::size_t>(nodes.cols()); }

  static FeatureGrid from_embedding(std::span<const float> values, const EmbeddingShape& shape) {
    if (values.size() != shape.size()) throw std::invalid_argument("embedding size does not match shape");
    FeatureGrid g;
    const auto positions = static_cast<Eigen::Index>(shape.positions());
    const auto channels = static_cast<Eigen::Index>(shape.dim);
    g.nodes.resize(positions, channels);
    for (Eigen::Index p = 0; p < positions; ++p)
      for (Eigen::Index c = 0; c < channels; ++c)
        g.nodes(p, c) = static_cast<double>(values[static_cast<std::size_t>(p * channels + c)]);
    return g;
  }

  static FeatureGrid from_vector(const Vector& v) {
    FeatureGrid g;
    g.nodes = v.transpose();
    return g;
  }
};

inline void check_channels(const FeatureGrid& a, const FeatureGrid& b) {
  if (a.channels() != b.channels())
    throw std::invalid_argument("channel mismatch: " + std::to_string(a.channels()) + " vs " +
                                std::to_string(b.channels()));
}

/// c_ij = 1 - cos(s_i, q_j), clamped to [0, 2]. A zero-norm node costs 1
/// against everything.
inline Matrix cosine_cost_matrix(const FeatureGrid& support, const FeatureGrid& query) {
  check_channels(support, query);
  const Vector sn = support.nodes.rowwise().norm();
  const Vector qn = query.nodes.rowwise().norm();
  Matrix cost = support.nodes * query.nodes.transpose();
  for (Eigen::Index i = 0; i < cost.rows(); ++i)
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      const double denom = sn(i) * qn(j);
      const double cosine = denom > 0.0 ? cost(i, j) / denom : 0.0;
      cost(i, j) = std::clamp(1.0 - cosine, 0.0, 2.0);
    }
  return cost;
}

/// max(0, u_i . mean(other nodes)) for every node of `own`, before
/// normalization.
inline std::vector<double> cross_reference_raw_weights(const FeatureGrid& own, const FeatureGrid& other) {
  check_channels(own, other);
  const Vector other_mean = other.nodes.colwise().mean().transpose();
  const Vector dots = own.nodes * other_mean;
  std::vector<double> w(static_cast<std::size_t>(dots.size()));
  for (Eigen::Index i = 0; i < dots.size(); ++i) w[static_cast<std::size_t>(i)] = std::max(0.0, dots(i));
  return w;
}

inline std::vector<double> cross_reference_weights(const FeatureGrid& own, const FeatureGrid& other) {
  return normalize_weights(cross_reference_raw_weights(own, other));
}

inline double emd_similarity(const FeatureGrid& support, const FeatureGrid& query) {
  if (support.node_count() == 0 || query.node_count() == 0) throw std::invalid_argument("empty feature grid");
  TransportInstance inst;
  inst.costs = cosine_cost_matrix(support, query);
  inst.supplies = cross_reference_weights(support, query);
  inst.demands = cross_reference_weights(query, support);
  const TransportPlan plan = solve_transport(inst);
  return ((1.0 - inst.costs.array()) * plan.flows.array()).sum();
}

/// Element-wise mean of same-shaped grids.
inline FeatureGrid mean_grid(std::span<const FeatureGrid> grids) {
  if (grids.empty()) throw std::invalid_argument("mean of an empty slot");
  FeatureGrid out{Matrix::Zero(grids.front().nodes.rows(), grids.front().nodes.cols())};
  for (const auto& g : grids) {
    if (g.nodes.rows() != out.nodes.rows() || g.nodes.cols() != out.nodes.cols())
      throw std::invalid_argument("mixed grid shapes within an episode");
    out.nodes += g.nodes;
  }
  out.nodes /= static_cast<double>(grids.size());
  return out;
}

using GridGroups = std::vector<std::vector<FeatureGrid>>;

/// One representative grid per slot (mean of its support grids); queries go
/// to the slot with the highest EMD similarity, ties to the lowest slot.
class EmdClassifier {
 public:
  explicit EmdClassifier(const GridGroups& support) {
    representatives_.reserve(support.size());
    for (const auto& slot : support) {
      representatives_.push_back(mean_grid(slot));
      const auto& first = representatives_.front().nodes;
      if (representatives_.back().nodes.rows() != first.rows() || representatives_.back().nodes.cols() != first.cols())
        throw std::invalid_argument("mixed grid shapes within an episode");
    }
  }

  std::vector<double> similarities(const FeatureGrid& query) const {
    std::vector<double> s;
    s.reserve(representatives_.size());
    for (const auto& rep : representatives_) s.push_back(emd_similarity(rep, query));
    return s;
  }

  std::size_t predict(const FeatureGrid& query) const {
    const auto s = similarities(query);
    return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  }

  const std::vector<FeatureGrid>& representatives() const { return representatives_; }

 private:
  std::vector<FeatureGrid> representatives_;
};

inline std::size_t classify_emd(const GridGroups& support, const FeatureGrid& query) {
  return EmdClassifier(support).predict(query);
}

}  // namespace fsk
