#pragma once

// Oracle-backed self checks run by `fsk selftest`.

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fsk/head_bdc.hpp"
#include "fsk/head_laplacian.hpp"
#include "fsk/rng.hpp"
#include "fsk/testing/generators.hpp"
#include "fsk/testing/oracles.hpp"
#include "fsk/transport.hpp"

namespace fsk {

using TransportSolverFn = std::function<TransportPlan(const TransportInstance&)>;

struct SelftestOptions {
  TransportSolverFn solver = [](const TransportInstance& inst) { return solve_transport(inst); };
  std::uint64_t seed = 20240917;
};

struct SuiteOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline SuiteOutcome transport_optimality_suite(const SelftestOptions& opt) {
  Xoshiro256 rng(opt.seed);
  for (int t = 0; t < 200; ++t) {
    const auto q = testing::random_quarter_instance(rng);
    const double expected = testing::brute_force_transport_cost(q.supply_units, q.demand_units, q.instance.costs) / 4.0;
    const double got = opt.solver(q.instance).total_cost;
    if (!(std::abs(got - expected) <= 1e-6))
      return {"transport-optimality", false,
              "instance " + std::to_string(t) + ": cost " + std::to_string(got) + ", oracle " + std::to_string(expected)};
  }
  return {"transport-optimality", true, "200 instances"};
}

inline SuiteOutcome transport_feasibility_suite(const SelftestOptions& opt) {
  Xoshiro256 rng(opt.seed + 1);
  for (int t = 0; t < 200; ++t) {
    const auto inst = testing::random_transport_instance(rng, 1 + rng.below(10), 1 + rng.below(10));
    const auto plan = opt.solver(inst);
    if ((plan.flows.array() < 0.0).any()) return {"transport-feasibility", false, "negative flow"};
    for (std::size_t i = 0; i < inst.supplies.size(); ++i)
      if (!(std::abs(plan.flows.row(static_cast<Eigen::Index>(i)).sum() - inst.supplies[i]) <= 1e-7))
        return {"transport-feasibility", false, "row marginal violated on instance " + std::to_string(t)};
    for (std::size_t j = 0; j < inst.demands.size(); ++j)
      if (!(std::abs(plan.flows.col(static_cast<Eigen::Index>(j)).sum() - inst.demands[j]) <= 1e-7))
        return {"transport-feasibility", false, "column marginal violated on instance " + std::to_string(t)};
  }
  return {"transport-feasibility", true, "200 instances"};
}

inline SuiteOutcome laplacian_descent_suite(const SelftestOptions& opt) {
  Xoshiro256 rng(opt.seed + 2);
  for (int t = 0; t < 50; ++t) {
    auto inst = testing::random_laplacian_instance(rng, 4 + rng.below(20), 2 + rng.below(4), 3);
    const auto res = laplacian_infer(inst.prototypes, inst.queries, {inst.lambda, 3, 20, 1e-6});
    for (std::size_t s = 1; s < res.energy_trace.size(); ++s)
      if (res.energy_trace[s] > res.energy_trace[s - 1] + 1e-8)
        return {"laplacian-descent", false, "objective increased on instance " + std::to_string(t)};
    const auto base = laplacian_infer(inst.prototypes, inst.queries, {0.0, 3, 20, 1e-6});
    for (std::size_t q = 0; q < inst.queries.size(); ++q)
      if (base.predictions[q] != nearest_prototype(inst.prototypes, inst.queries[q]))
        return {"laplacian-descent", false, "lambda=0 differs from nearest prototype on instance " + std::to_string(t)};
  }
  return {"laplacian-descent", true, "50 instances"};
}

inline SuiteOutcome laplacian_exhaustive_suite(const SelftestOptions& opt) {
  Xoshiro256 rng(opt.seed + 3);
  for (int t = 0; t < 50; ++t) {
    const auto inst = testing::well_separated_instance(rng);
    const LaplacianConfig cfg{inst.lambda, 3, 50, 1e-9};
    const Affinity w = build_affinity(inst.queries, cfg.knn);
    const auto res = laplacian_infer(inst.prototypes, inst.queries, cfg, w);
    Matrix unary(inst.queries.size(), 2);
    for (std::size_t q = 0; q < inst.queries.size(); ++q)
      for (std::size_t c = 0; c < 2; ++c)
        unary(q, c) = (inst.queries[q] - inst.prototypes.prototypes[c]).squaredNorm();
    const auto best = testing::brute_force_laplacian(unary, w.weights, inst.lambda);
    if (best.labels != res.predictions)
      return {"laplacian-exhaustive", false, "instance " + std::to_string(t) + " differs from the exhaustive minimizer"};
  }
  return {"laplacian-exhaustive", true, "50 instances"};
}

inline SuiteOutcome double_centering_suite(const SelftestOptions& opt) {
  FeatureGrid hand;
  hand.nodes = Matrix{{0.0, 2.0}};
  const Matrix expected{{-1.0, 1.0}, {1.0, -1.0}};
  if (!bdc_matrix(hand).values.isApprox(expected, 1e-12))
    return {"double-centering", false, "hand example (0,2) mismatch"};
  Xoshiro256 rng(opt.seed + 4);
  for (int t = 0; t < 50; ++t) {
    FeatureGrid g;
    g.nodes.resize(1 + static_cast<Eigen::Index>(rng.below(25)), 2 + static_cast<Eigen::Index>(rng.below(16)));
    for (auto& v : g.nodes.reshaped()) v = rng.normal();
    const Matrix a = bdc_matrix(g).values;
    if (a.rowwise().sum().cwiseAbs().maxCoeff() >= 1e-6 || a.colwise().sum().cwiseAbs().maxCoeff() >= 1e-6)
      return {"double-centering", false, "nonzero row/column sum"};
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9) return {"double-centering", false, "asymmetric"};
    Matrix d(g.nodes.cols(), g.nodes.cols());
    for (Eigen::Index k = 0; k < d.rows(); ++k)
      for (Eigen::Index l = 0; l < d.cols(); ++l) d(k, l) = (g.nodes.col(k) - g.nodes.col(l)).norm();
    if ((testing::naive_double_centering(d) - a).cwiseAbs().maxCoeff() > 1e-9)
      return {"double-centering", false, "differs from element-wise double centering"};
  }
  return {"double-centering", true, "51 matrices"};
}

}  // namespace detail

/// Runs every suite, printing one "name ... PASS|FAIL" line each. Returns
/// true when all pass.
inline bool run_selftest(std::ostream& out, const SelftestOptions& options = {}) {
  using Suite = std::function<SuiteOutcome(const SelftestOptions&)>;
  const std::vector<std::pair<std::string, Suite>> suites = {
      {"transport-optimality", detail::transport_optimality_suite},
      {"transport-feasibility", detail::transport_feasibility_suite},
      {"laplacian-descent", detail::laplacian_descent_suite},
      {"laplacian-exhaustive", detail::laplacian_exhaustive_suite},
      {"double-centering", detail::double_centering_suite}};
  bool all = true;
  for (const auto& [suite_name, suite] : suites) {
    SuiteOutcome r;
    try {
      r = suite(options);
    } catch (const std::exception& e) {
      r = {suite_name, false, std::string("threw: ") + e.what()};
    }
    all = all && r.passed;
    std::string name = r.name;
    name.resize(std::max<std::size_t>(name.size() + 1, 24), ' ');
    out << name << (r.passed ? "PASS" : "FAIL") << "  (" << r.detail << ")\n";
  }
  return all;
}

}  // namespace fsk
