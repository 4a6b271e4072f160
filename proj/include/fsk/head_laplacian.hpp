#pragma once

// Transductive Laplacian-regularized inference (LaplacianShot).
//
// Objective over soft assignments Y (one row per query, K columns):
//
//   E(Y) = sum_q sum_c y_qc d(z_q, m_c)  +  lambda * 1/2 * 1/2 * sum_{q,p} w_qp |y_q - y_p|^2
//
// with d the squared Euclidean distance to prototype m_c. The solver
// minimizes the entropic relaxation
//
//   R(Y) = sum_q y_q.a_q - lambda/2 sum_{q,p} w_qp y_q.y_p + sum_q y_q.log y_q
//
// which agrees with E up to a constant on hard assignments (|y|^2 = 1 on
// simplex vertices). For one row with the others held fixed, R is strictly
// convex and minimized in closed form by
//
//   y_q  ∝  exp(-a_q + lambda * sum_p w_qp y_p)
//
// Rows are updated in place one at a time, so every update is an exact block
// minimization and R never increases, whatever the sign structure of W.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fsk/error.hpp"
#include "fsk/head_metric.hpp"

namespace fsk {

struct Affinity {
  Matrix weights;  // symmetric, nonnegative, zero diagonal
};

struct SoftAssignment {
  Matrix rows;  // queries x slots, each row a distribution
};

struct LaplacianConfig {
  double lambda = 1.0;
  std::size_t knn = 3;
  std::size_t max_iters = 20;
  double tol = 1e-6;
};

struct LaplacianResult {
  SoftAssignment assignment;
  std::vector<std::size_t> predictions;
  std::vector<double> energy_trace;  // relaxed objective R after init and each sweep
  std::size_t iterations = 0;
};

/// kNN-sparsified RBF affinity with a self-tuned bandwidth: sigma is the mean
/// over queries of the distance to the knn-th neighbour. knn is clamped to
/// Q-1. The result is symmetrized as (W + W^T) / 2.
inline Affinity build_affinity(std::span<const Vector> queries, std::size_t knn) {
  const std::size_t n = queries.size();
  Affinity out{Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  const std::size_t k = std::min(knn, n == 0 ? 0 : n - 1);
  if (k == 0) return out;

  Matrix dist2(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dist2(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) dist2(i, j) = dist2(j, i) = squared_distance(queries[i], queries[j]);
  }

  std::vector<std::vector<std::size_t>> neighbours(n);
  double sigma_sum = 0.0;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist2(i, a) < dist2(i, b); });
    neighbours[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    sigma_sum += std::sqrt(dist2(i, neighbours[i].back()));
  }
  const double sigma = sigma_sum / static_cast<double>(n);
  // All kNN distances are zero: any positive bandwidth gives exp(0) = 1 there.
  const double sigma2 = sigma > 0.0 ? sigma * sigma : 1.0;

  Matrix w = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : neighbours[i]) w(i, j) = std::exp(-dist2(i, j) / sigma2);
  out.weights = 0.5 * (w + w.transpose());
  out.weights.diagonal().setZero();
  return out;
}

namespace detail {

inline Matrix unary_costs(const PrototypeSet& prototypes, std::span<const Vector> queries) {
  Matrix a(queries.size(), prototypes.ways());
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t c = 0; c < prototypes.ways(); ++c)
      a(q, c) = squared_distance(queries[q], prototypes.prototypes[c]);
  return a;
}

inline double relaxed_objective(const Matrix& y, const Matrix& unary, const Matrix& w, double lambda) {
  double value = (y.array() * unary.array()).sum();
  value -= 0.5 * lambda * (y.transpose() * w * y).trace();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = y.data()[i];
    if (p > 0.0) value += p * std::log(p);
  }
  return value;
}

}  // namespace detail

inline double energy(const SoftAssignment& assignment, const PrototypeSet& prototypes,
                     std::span<const Vector> queries, const Affinity& affinity, double lambda) {
  const Matrix& y = assignment.rows;
  const Matrix unary = detail::unary_costs(prototypes, queries);
  const double data_term = (y.array() * unary.array()).sum();
  double laplacian = 0.0;
  const auto n = y.rows();
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index p = 0; p < n; ++p)
      if (affinity.weights(q, p) != 0.0) laplacian += affinity.weights(q, p) * (y.row(q) - y.row(p)).squaredNorm();
  return data_term + lambda * 0.5 * 0.5 * laplacian;
}

/// Value of the relaxed objective the solver descends (see file comment).
inline double relaxed_objective(const SoftAssignment& assignment, const PrototypeSet& prototypes,
                                std::span<const Vector> queries, const Affinity& affinity, double lambda) {
  return detail::relaxed_objective(assignment.rows, detail::unary_costs(prototypes, queries),
                                   affinity.weights, lambda);
}

inline std::vector<std::size_t> hard_predictions(const SoftAssignment& assignment) {
  std::vector<std::size_t> out(static_cast<std::size_t>(assignment.rows.rows()));
  for (Eigen::Index q = 0; q < assignment.rows.rows(); ++q) {
    Eigen::Index best = 0;
    assignment.rows.row(q).maxCoeff(&best);  // first maximum
    out[static_cast<std::size_t>(q)] = static_cast<std::size_t>(best);
  }
  return out;
}

inline LaplacianResult laplacian_infer(const PrototypeSet& prototypes, std::span<const Vector> queries,
                                       const LaplacianConfig& config, const Affinity& affinity) {
  if (queries.empty()) throw std::invalid_argument("laplacian_infer needs at least one query");
  if (prototypes.ways() < 1) throw std::invalid_argument("laplacian_infer needs prototypes");
  if (!(config.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(config.tol > 0.0)) throw std::invalid_argument("tol must be > 0");

  const Matrix unary = detail::unary_costs(prototypes, queries);
  const Matrix& w = affinity.weights;
  const auto n = unary.rows();
  const auto k = unary.cols();

  LaplacianResult result;
  Matrix& y = result.assignment.rows;
  y.resize(n, k);
  std::vector<double> logits(static_cast<std::size_t>(k));
  auto set_row = [&](Eigen::Index q) {
    const auto post = softmax(logits);
    for (Eigen::Index c = 0; c < k; ++c) y(q, c) = post.probs[static_cast<std::size_t>(c)];
  };
  for (Eigen::Index q = 0; q < n; ++q) {
    for (Eigen::Index c = 0; c < k; ++c) logits[static_cast<std::size_t>(c)] = -unary(q, c);
    set_row(q);
  }

  auto record = [&] {
    const double r = detail::relaxed_objective(y, unary, w, config.lambda);
    if (!std::isfinite(r))
      throw NumericalError("laplacian_infer: non-finite objective after " +
                           std::to_string(result.iterations) + " sweeps (lambda " +
                           std::to_string(config.lambda) + ", " + std::to_string(n) + " queries)");
    result.energy_trace.push_back(r);
  };
  record();

  Vector previous(k);
  while (result.iterations < config.max_iters) {
    double max_change = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
      previous = y.row(q).transpose();
      for (Eigen::Index c = 0; c < k; ++c) {
        double pull = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
          if (w(q, p) != 0.0) pull += w(q, p) * y(p, c);
        logits[static_cast<std::size_t>(c)] = -unary(q, c) + config.lambda * pull;
      }
      set_row(q);
      max_change = std::max(max_change, (y.row(q).transpose() - previous).cwiseAbs().maxCoeff());
    }
    ++result.iterations;
    record();
    if (max_change < config.tol) break;
  }
  result.predictions = hard_predictions(result.assignment);
  return result;
}

inline LaplacianResult laplacian_infer(const PrototypeSet& prototypes, std::span<const Vector> queries,
                                       const LaplacianConfig& config) {
  return laplacian_infer(prototypes, queries, config, build_affinity(queries, config.knn));
}

}  // namespace fsk
