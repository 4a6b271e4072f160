#pragma once

// Exact solver for the balanced transportation problem
//
//   minimize   sum_ij c_ij x_ij
//   subject to sum_j x_ij = s_i,  sum_i x_ij = d_j,  x >= 0.
//
// Transportation simplex: Vogel's approximation builds a basic feasible
// solution whose m+k-1 basic cells form a spanning tree of the bipartite
// supplier/demander graph (degenerate zero-flow cells are kept in the basis
// explicitly). Each iteration computes MODI potentials u_i + v_j = c_ij on
// the tree, prices the non-basic cells, and pivots around the unique cycle
// closed by the entering cell. Dantzig pricing is used until a run of
// degenerate pivots appears; from then on Bland's smallest-index rule is used
// until a pivot makes progress, which rules out cycling.
//
// Flows in the returned plan are recomputed from the final basis tree by
// leaf elimination against the original marginals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fsk {

struct TransportInstance {
  std::vector<double> supplies;
  std::vector<double> demands;
  Eigen::MatrixXd costs;  // supplies.size() x demands.size()
};

struct TransportPlan {
  Eigen::MatrixXd flows;
  double total_cost = 0.0;
  std::size_t pivots = 0;
};

inline constexpr double kBalanceTolerance = 1e-9;

/// Rescales nonnegative weights to sum to one. An all-zero input maps to the
/// uniform vector.
inline std::vector<double> normalize_weights(std::span<const double> raw) {
  double total = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("normalize_weights: negative or non-finite entry");
    total += v;
  }
  std::vector<double> out(raw.begin(), raw.end());
  if (out.empty()) return out;
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

namespace detail {

class TransportSimplex {
 public:
  explicit TransportSimplex(const TransportInstance& inst)
      : m_(inst.supplies.size()), k_(inst.demands.size()), inst_(inst) {}

  TransportPlan solve() {
    vogel_start();
    iterate();
    return extract();
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t cell(std::size_t i, std::size_t j) const { return i * k_ + j; }
  double cost(std::size_t c) const { return inst_.costs(static_cast<Eigen::Index>(c / k_), static_cast<Eigen::Index>(c % k_)); }
  std::size_t row_node(std::size_t c) const { return c / k_; }
  std::size_t col_node(std::size_t c) const { return m_ + c % k_; }
  std::size_t other_end(std::size_t c, std::size_t node) const {
    return node == row_node(c) ? col_node(c) : row_node(c);
  }

  void add_basic(std::size_t c, double flow) {
    basic_[c] = 1;
    flow_[c] = flow;
    adj_[row_node(c)].push_back(c);
    adj_[col_node(c)].push_back(c);
  }

  void remove_basic(std::size_t c) {
    basic_[c] = 0;
    flow_[c] = 0.0;
    for (std::size_t node : {row_node(c), col_node(c)}) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), c));
    }
  }

  void vogel_start() {
    const std::size_t cells = m_ * k_;
    flow_.assign(cells, 0.0);
    basic_.assign(cells, 0);
    adj_.assign(m_ + k_, {});
    std::vector<double> supply(inst_.supplies), demand(inst_.demands);
    std::vector<char> row_alive(m_, 1), col_alive(k_, 1);
    std::size_t rows_left = m_, cols_left = k_;

    // Penalty of a line: gap between its two cheapest live cells.
    auto line_penalty = [&](bool is_row, std::size_t idx, std::size_t& best_cell) {
      double first = std::numeric_limits<double>::infinity(), second = first;
      best_cell = kNone;
      const std::size_t span = is_row ? k_ : m_;
      for (std::size_t t = 0; t < span; ++t) {
        if (is_row ? !col_alive[t] : !row_alive[t]) continue;
        const std::size_t c = is_row ? cell(idx, t) : cell(t, idx);
        const double v = cost(c);
        if (v < first) {
          second = first;
          first = v;
          best_cell = c;
        } else if (v < second) {
          second = v;
        }
      }
      return std::isinf(second) ? first : second - first;
    };

    while (rows_left > 0 && cols_left > 0) {
      double best_penalty = -std::numeric_limits<double>::infinity();
      std::size_t chosen = kNone;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!row_alive[i]) continue;
        std::size_t c;
        const double p = line_penalty(true, i, c);
        if (p > best_penalty) best_penalty = p, chosen = c;
      }
      for (std::size_t j = 0; j < k_; ++j) {
        if (!col_alive[j]) continue;
        std::size_t c;
        const double p = line_penalty(false, j, c);
        if (p > best_penalty) best_penalty = p, chosen = c;
      }
      const std::size_t i = chosen / k_, j = chosen % k_;
      const double amount = std::min(supply[i], demand[j]);
      add_basic(chosen, amount);
      supply[i] = std::max(0.0, supply[i] - amount);
      demand[j] = std::max(0.0, demand[j] - amount);
      // Exactly one line leaves per allocation (both on the last one), which
      // makes the m+k-1 basic cells a spanning tree.
      if (rows_left == 1 && cols_left == 1) {
        row_alive[i] = col_alive[j] = 0;
        rows_left = cols_left = 0;
      } else if (rows_left == 1) {
        col_alive[j] = 0, --cols_left;
      } else if (cols_left == 1) {
        row_alive[i] = 0, --rows_left;
      } else if (supply[i] <= demand[j]) {
        row_alive[i] = 0, --rows_left;
      } else {
        col_alive[j] = 0, --cols_left;
      }
    }
  }

  // u (rows) and v (columns) stored together, indexed by node.
  void compute_potentials() {
    potential_.assign(m_ + k_, 0.0);
    seen_.assign(m_ + k_, 0);
    stack_.clear();
    stack_.push_back(0);
    seen_[0] = 1;
    while (!stack_.empty()) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      for (std::size_t c : adj_[node]) {
        const std::size_t next = other_end(c, node);
        if (seen_[next]) continue;
        seen_[next] = 1;
        potential_[next] = cost(c) - potential_[node];
        stack_.push_back(next);
      }
    }
  }

  // Basic cells on the tree path from row node `from` to column node `to`,
  // ordered from `to` back to `from`.
  void tree_path(std::size_t from, std::size_t to) {
    parent_cell_.assign(m_ + k_, kNone);
    seen_.assign(m_ + k_, 0);
    stack_.clear();
    stack_.push_back(from);
    seen_[from] = 1;
    while (!stack_.empty() && !seen_[to]) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      for (std::size_t c : adj_[node]) {
        const std::size_t next = other_end(c, node);
        if (seen_[next]) continue;
        seen_[next] = 1;
        parent_cell_[next] = c;
        stack_.push_back(next);
      }
    }
    path_.clear();
    for (std::size_t node = to; node != from;) {
      const std::size_t c = parent_cell_[node];
      path_.push_back(c);
      node = other_end(c, node);
    }
  }

  void iterate() {
    double scale = 1.0;
    for (Eigen::Index i = 0; i < inst_.costs.size(); ++i)
      scale = std::max(scale, std::abs(inst_.costs.data()[i]));
    const double eps = 1e-12 * scale;
    const std::size_t max_pivots = 50 * m_ * k_ + 1000;
    const std::size_t degenerate_limit = m_ + k_;
    std::size_t degenerate_run = 0;
    bool bland = false;

    for (;;) {
      compute_potentials();
      std::size_t entering = kNone;
      double most_negative = -eps;
      for (std::size_t c = 0; c < m_ * k_ && !(bland && entering != kNone); ++c) {
        if (basic_[c]) continue;
        const double reduced = cost(c) - potential_[row_node(c)] - potential_[col_node(c)];
        if (reduced < most_negative) {
          entering = c;
          if (!bland) most_negative = reduced;
        }
      }
      if (entering == kNone) return;
      if (pivots_ >= max_pivots)
        throw std::runtime_error("transport simplex exceeded " + std::to_string(max_pivots) + " pivots");

      tree_path(row_node(entering), col_node(entering));
      // path_[0] touches the entering column; signs alternate -,+,-,... and
      // the path has odd length, so its last cell (touching the entering row)
      // is also a donor.
      double theta = std::numeric_limits<double>::infinity();
      std::size_t leaving = kNone;
      for (std::size_t t = 0; t < path_.size(); t += 2) {
        const std::size_t c = path_[t];
        if (flow_[c] < theta || (flow_[c] == theta && c < leaving)) {
          theta = flow_[c];
          leaving = c;
        }
      }
      theta = std::max(0.0, theta);
      for (std::size_t t = 0; t < path_.size(); ++t) {
        double& f = flow_[path_[t]];
        f = (t % 2 == 0) ? std::max(0.0, f - theta) : f + theta;
      }
      remove_basic(leaving);
      add_basic(entering, theta);
      ++pivots_;

      if (theta <= eps) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  TransportPlan extract() {
    // Leaf elimination: a leaf node's single basic cell carries its whole
    // remaining marginal.
    std::vector<double> residual(m_ + k_);
    for (std::size_t i = 0; i < m_; ++i) residual[i] = inst_.supplies[i];
    for (std::size_t j = 0; j < k_; ++j) residual[m_ + j] = inst_.demands[j];
    std::vector<std::size_t> degree(m_ + k_);
    for (std::size_t n = 0; n < m_ + k_; ++n) degree[n] = adj_[n].size();
    std::vector<char> used(m_ * k_, 0);
    std::vector<std::size_t> leaves;
    for (std::size_t n = 0; n < m_ + k_; ++n)
      if (degree[n] == 1) leaves.push_back(n);

    TransportPlan plan;
    plan.flows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(k_));
    while (!leaves.empty()) {
      const std::size_t node = leaves.back();
      leaves.pop_back();
      if (degree[node] != 1) continue;
      std::size_t c = kNone;
      for (std::size_t e : adj_[node])
        if (!used[e]) c = e;
      used[c] = 1;
      const double f = std::max(0.0, residual[node]);
      plan.flows(static_cast<Eigen::Index>(c / k_), static_cast<Eigen::Index>(c % k_)) = f;
      const std::size_t other = other_end(c, node);
      residual[node] = 0.0;
      residual[other] -= f;
      --degree[node];
      if (--degree[other] == 1) leaves.push_back(other);
    }
    plan.total_cost = (plan.flows.array() * inst_.costs.array()).sum();
    plan.pivots = pivots_;
    return plan;
  }

  std::size_t m_, k_;
  const TransportInstance& inst_;
  std::vector<double> flow_;
  std::vector<char> basic_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> potential_;
  std::vector<char> seen_;
  std::vector<std::size_t> stack_, parent_cell_, path_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

inline TransportPlan solve_transport(const TransportInstance& instance) {
  const std::size_t m = instance.supplies.size(), k = instance.demands.size();
  if (static_cast<std::size_t>(instance.costs.rows()) != m || static_cast<std::size_t>(instance.costs.cols()) != k)
    throw std::invalid_argument("cost matrix shape does not match supplies x demands");
  double supply = 0.0, demand = 0.0;
  for (double s : instance.supplies) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("supplies must be finite and >= 0");
    supply += s;
  }
  for (double d : instance.demands) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("demands must be finite and >= 0");
    demand += d;
  }
  if (!instance.costs.allFinite()) throw std::invalid_argument("costs must be finite");
  if (std::abs(supply - demand) > kBalanceTolerance * std::max(1.0, supply))
    throw std::invalid_argument("unbalanced transport instance: supply " + std::to_string(supply) +
                                " vs demand " + std::to_string(demand));
  if (m == 0 || k == 0 || supply <= 0.0) {
    TransportPlan zero;
    zero.flows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    return zero;
  }
  return detail::TransportSimplex(instance).solve();
}

}  // namespace fsk
