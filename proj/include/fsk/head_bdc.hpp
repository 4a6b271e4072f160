#pragma once

// DeepBDC inference. Each image is represented by its Brownian distance
// covariance matrix: the Euclidean distance matrix between channel columns
// (each channel's values across the H*W positions), double-centered. Class
// prototypes are mean BDC matrices and queries are scored with
// softmax(tau * <A_query, P_k>_F).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fsk/head_emd.hpp"
#include "fsk/head_metric.hpp"

namespace fsk {

struct BdcMatrix {
  Matrix values;  // C x C
};

struct BdcPrototype {
  Matrix matrix;  // C x C
};

/// A = D - rowmean(D) - colmean(D) + mean(D) with D_kl = |col_k - col_l|.
inline Matrix double_center(const Matrix& d) {
  const Vector row_mean = d.rowwise().mean();
  const Eigen::RowVectorXd col_mean = d.colwise().mean();
  const double grand = d.mean();
  Matrix a = d;
  a.colwise() -= row_mean;
  a.rowwise() -= col_mean;
  a.array() += grand;
  return a;
}

inline BdcMatrix bdc_matrix(const FeatureGrid& grid) {
  const auto c = grid.nodes.cols();
  if (c < 2) throw std::invalid_argument("BDC matrix needs at least 2 channels");
  if (grid.nodes.rows() < 1) throw std::invalid_argument("BDC matrix needs at least one position");
  Matrix d = Matrix::Zero(c, c);
  for (Eigen::Index k = 0; k < c; ++k)
    for (Eigen::Index l = k + 1; l < c; ++l) d(k, l) = d(l, k) = (grid.nodes.col(k) - grid.nodes.col(l)).norm();
  return {double_center(d)};
}

inline std::vector<BdcPrototype> bdc_prototypes(const std::vector<std::vector<BdcMatrix>>& support) {
  std::vector<BdcPrototype> out;
  out.reserve(support.size());
  for (const auto& slot : support) {
    if (slot.empty()) throw std::invalid_argument("empty support slot");
    Matrix sum = Matrix::Zero(slot.front().values.rows(), slot.front().values.cols());
    for (const auto& a : slot) {
      if (a.values.rows() != sum.rows() || a.values.cols() != sum.cols())
        throw std::invalid_argument("mixed shapes within an episode");
      sum += a.values;
    }
    out.push_back({sum / static_cast<double>(slot.size())});
    if (out.back().matrix.rows() != out.front().matrix.rows())
      throw std::invalid_argument("mixed shapes within an episode");
  }
  return out;
}

inline std::vector<BdcPrototype> bdc_prototypes(const GridGroups& support) {
  std::vector<std::vector<BdcMatrix>> matrices(support.size());
  for (std::size_t s = 0; s < support.size(); ++s)
    for (const auto& g : support[s]) matrices[s].push_back(bdc_matrix(g));
  return bdc_prototypes(matrices);
}

inline Posterior classify_bdc(const std::vector<BdcPrototype>& prototypes, const BdcMatrix& query, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  std::vector<double> logits;
  logits.reserve(prototypes.size());
  for (const auto& p : prototypes) {
    if (p.matrix.rows() != query.values.rows() || p.matrix.cols() != query.values.cols())
      throw std::invalid_argument("BDC channel mismatch");
    logits.push_back(tau * (query.values.array() * p.matrix.array()).sum());
  }
  return softmax(logits);
}

inline double bdc_loss(const Posterior& posterior, std::size_t true_slot) {
  return negative_log_likelihood(posterior, true_slot);
}

}  // namespace fsk
