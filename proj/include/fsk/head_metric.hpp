#pragma once

// Metric heads over pooled embeddings: Prototypical Networks (softmax over
// negative squared Euclidean distances to class means) and SimpleShot
// (nearest class mean, optionally after centering / L2 normalization).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fsk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Support vectors grouped by episode slot.
using SlotGroups = std::vector<std::vector<Vector>>;

/// −log(0) is reported as this value so aggregates stay finite.
inline constexpr double kLossCap = 50.0;

struct PrototypeSet {
  std::vector<Vector> prototypes;

  std::size_t ways() const { return prototypes.size(); }
};

struct Posterior {
  std::vector<double> probs;

  /// Index of the largest probability; ties go to the lowest slot.
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
};

enum class TransformKind { none, center, l2, center_then_l2 };

inline std::string_view transform_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::none: return "none";
    case TransformKind::center: return "center";
    case TransformKind::l2: return "l2";
    case TransformKind::center_then_l2: return "center_then_l2";
  }
  return "none";
}

inline std::optional<TransformKind> parse_transform(std::string_view text) {
  for (auto k : {TransformKind::none, TransformKind::center, TransformKind::l2,
                 TransformKind::center_then_l2})
    if (transform_name(k) == text) return k;
  return std::nullopt;
}

struct FeatureTransform {
  TransformKind kind = TransformKind::none;
  std::optional<Vector> base_mean;  // required by the center variants
};

inline void check_dims(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
}

inline double squared_distance(const Vector& a, const Vector& b) {
  check_dims(a, b);
  return (a - b).squaredNorm();
}

/// Numerically stable softmax (max subtraction).
inline Posterior softmax(std::span<const double> logits) {
  Posterior out;
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  out.probs.resize(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.probs[i] = std::exp(logits[i] - top);
    total += out.probs[i];
  }
  for (double& p : out.probs) p /= total;
  return out;
}

inline Vector mean_of(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("mean of an empty slot");
  Vector sum = Vector::Zero(vectors.front().size());
  for (const auto& v : vectors) {
    check_dims(v, sum);
    sum += v;
  }
  return sum / static_cast<double>(vectors.size());
}

inline PrototypeSet compute_prototypes(const SlotGroups& support) {
  PrototypeSet set;
  set.prototypes.reserve(support.size());
  for (const auto& slot : support) {
    set.prototypes.push_back(mean_of(slot));
    check_dims(set.prototypes.back(), set.prototypes.front());
  }
  return set;
}

/// Squared Euclidean distance from `query` to every prototype.
inline std::vector<double> prototype_distances(const PrototypeSet& prototypes, const Vector& query) {
  std::vector<double> d(prototypes.ways());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = squared_distance(query, prototypes.prototypes[k]);
  return d;
}

/// Nearest prototype under squared Euclidean distance; ties to lowest slot.
inline std::size_t nearest_prototype(const PrototypeSet& prototypes, const Vector& query) {
  const auto d = prototype_distances(prototypes, query);
  return static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
}

inline Posterior classify_protonet(const PrototypeSet& prototypes, const Vector& query) {
  auto logits = prototype_distances(prototypes, query);
  for (double& v : logits) v = -v;
  return softmax(logits);
}

/// −log p[true_slot], capped at kLossCap.
inline double negative_log_likelihood(const Posterior& posterior, std::size_t true_slot) {
  if (true_slot >= posterior.probs.size()) throw std::out_of_range("true slot out of range");
  const double p = posterior.probs[true_slot];
  if (p <= 0.0) return kLossCap;
  return std::min(kLossCap, std::max(0.0, -std::log(p)));
}

inline double protonet_loss(const Posterior& posterior, std::size_t true_slot) {
  return negative_log_likelihood(posterior, true_slot);
}

inline Vector apply_transform(const Vector& v, const FeatureTransform& transform) {
  Vector out = v;
  const bool center = transform.kind == TransformKind::center ||
                      transform.kind == TransformKind::center_then_l2;
  const bool l2 = transform.kind == TransformKind::l2 ||
                  transform.kind == TransformKind::center_then_l2;
  if (center) {
    if (!transform.base_mean) throw std::invalid_argument("centering transform requires base_mean");
    check_dims(out, *transform.base_mean);
    out -= *transform.base_mean;
  }
  if (l2) {
    const double norm = out.norm();
    if (norm > 0.0) out /= norm;
  }
  return out;
}

inline std::vector<Vector> apply_transform(std::span<const Vector> vectors, const FeatureTransform& transform) {
  std::vector<Vector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(apply_transform(v, transform));
  return out;
}

/// SimpleShot: each support vector is transformed, class means are taken in
/// the transformed space, and queries go to the nearest mean.
class NearestMeanClassifier {
 public:
  NearestMeanClassifier(const SlotGroups& support, FeatureTransform transform)
      : transform_(std::move(transform)) {
    SlotGroups transformed;
    transformed.reserve(support.size());
    for (const auto& slot : support) transformed.push_back(apply_transform(slot, transform_));
    means_ = compute_prototypes(transformed);
  }

  std::size_t predict(const Vector& query) const {
    return nearest_prototype(means_, apply_transform(query, transform_));
  }

  const PrototypeSet& means() const { return means_; }

 private:
  FeatureTransform transform_;
  PrototypeSet means_;
};

inline std::size_t classify_simpleshot(const SlotGroups& support, const Vector& query,
                                       const FeatureTransform& transform = {}) {
  return NearestMeanClassifier(support, transform).predict(query);
}

}  // namespace fsk
