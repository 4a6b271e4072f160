#include <chrono>

#include <gtest/gtest.h>

#include "fsk/testing/generators.hpp"
#include "fsk/testing/oracles.hpp"
#include "fsk/transport.hpp"

namespace fsk {
namespace {

void expect_feasible(const TransportInstance& inst, const TransportPlan& plan, double tol = 1e-7) {
  ASSERT_EQ(plan.flows.rows(), static_cast<Eigen::Index>(inst.supplies.size()));
  ASSERT_EQ(plan.flows.cols(), static_cast<Eigen::Index>(inst.demands.size()));
  EXPECT_GE(plan.flows.size() == 0 ? 0.0 : plan.flows.minCoeff(), 0.0);
  for (std::size_t i = 0; i < inst.supplies.size(); ++i)
    EXPECT_NEAR(plan.flows.row(static_cast<Eigen::Index>(i)).sum(), inst.supplies[i], tol);
  for (std::size_t j = 0; j < inst.demands.size(); ++j)
    EXPECT_NEAR(plan.flows.col(static_cast<Eigen::Index>(j)).sum(), inst.demands[j], tol);
  EXPECT_NEAR(plan.total_cost, (plan.flows.array() * inst.costs.array()).sum(), 1e-12);
  EXPECT_LE((plan.flows.array() > 0.0).count(),
            static_cast<Eigen::Index>(inst.supplies.size() + inst.demands.size() - 1));
}

TEST(Transport, SingleCell) {
  const TransportInstance inst{{1.0}, {1.0}, Eigen::MatrixXd{{0.7}}};
  const auto plan = solve_transport(inst);
  EXPECT_DOUBLE_EQ(plan.flows(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(plan.total_cost, 0.7);
}

TEST(Transport, ZeroCostMatching) {
  const TransportInstance inst{{0.5, 0.5}, {0.5, 0.5}, Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}}};
  const auto plan = solve_transport(inst);
  EXPECT_DOUBLE_EQ(plan.flows(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(plan.flows(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(plan.flows(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(plan.total_cost, 0.0);
}

TEST(Transport, ZeroMassGivesZeroPlan) {
  const TransportInstance inst{{0.0, 0.0}, {0.0, 0.0, 0.0}, Eigen::MatrixXd::Ones(2, 3)};
  const auto plan = solve_transport(inst);
  EXPECT_EQ(plan.flows, Eigen::MatrixXd::Zero(2, 3));
  EXPECT_EQ(plan.total_cost, 0.0);
}

TEST(Transport, InvalidInstancesRejected) {
  EXPECT_THROW(solve_transport({{1.0}, {0.5}, Eigen::MatrixXd{{1.0}}}), std::invalid_argument);
  EXPECT_THROW(solve_transport({{1.5, -0.5}, {1.0}, Eigen::MatrixXd{{1.0}, {1.0}}}), std::invalid_argument);
  EXPECT_THROW(solve_transport({{1.0}, {1.0}, Eigen::MatrixXd{{1.0, 2.0}}}), std::invalid_argument);
  EXPECT_THROW(solve_transport({{1.0}, {1.0}, Eigen::MatrixXd{{std::nan("")}}}), std::invalid_argument);
}

TEST(Transport, UnnormalizedIntegerInstance) {
  const TransportInstance inst{{7, 5, 3}, {4, 6, 2, 3}, Eigen::MatrixXd{{3, 1, 7, 4}, {2, 6, 5, 9}, {8, 3, 3, 2}}};
  const auto plan = solve_transport(inst);
  expect_feasible(inst, plan, 1e-9);
  EXPECT_NEAR(plan.total_cost, testing::brute_force_transport_cost({7, 5, 3}, {4, 6, 2, 3}, inst.costs), 1e-9);
}

TEST(Transport, MatchesBruteForceOnQuarterInstances) {
  Xoshiro256 rng(1);
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < 300; ++t) {
    const auto q = testing::random_quarter_instance(rng);
    const auto plan = solve_transport(q.instance);
    const double oracle = testing::brute_force_transport_cost(q.supply_units, q.demand_units, q.instance.costs) / 4.0;
    EXPECT_NEAR(plan.total_cost, oracle, 1e-6) << "instance " << t;
    expect_feasible(q.instance, plan);
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

TEST(Transport, ThreeByThreeQuarterInstances) {
  Xoshiro256 rng(2);
  for (int t = 0; t < 100; ++t) {
    testing::QuarterInstance q;
    q.supply_units = testing::random_composition(rng, 4, 3);
    q.demand_units = testing::random_composition(rng, 4, 3);
    for (int u : q.supply_units) q.instance.supplies.push_back(u / 4.0);
    for (int u : q.demand_units) q.instance.demands.push_back(u / 4.0);
    q.instance.costs = Eigen::MatrixXd::Random(3, 3).array() + 1.0;
    const double oracle = testing::brute_force_transport_cost(q.supply_units, q.demand_units, q.instance.costs) / 4.0;
    EXPECT_NEAR(solve_transport(q.instance).total_cost, oracle, 1e-6);
  }
}

TEST(Transport, DegenerateInstances) {
  // Equal partial sums everywhere force degenerate pivots.
  Xoshiro256 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(8);
    TransportInstance inst;
    inst.supplies.assign(n, 1.0 / static_cast<double>(n));
    inst.demands.assign(n, 1.0 / static_cast<double>(n));
    inst.costs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < inst.costs.size(); ++i) inst.costs.data()[i] = static_cast<double>(rng.below(3));
    expect_feasible(inst, solve_transport(inst));
  }
}

TEST(Transport, FeasibleOnRandomInstancesUpToTenByTen) {
  Xoshiro256 rng(4);
  for (int t = 0; t < 1000; ++t) {
    const auto inst = testing::random_transport_instance(rng, 1 + rng.below(10), 1 + rng.below(10));
    expect_feasible(inst, solve_transport(inst));
  }
}

TEST(Transport, NoWorseThanRandomFeasiblePlans) {
  Xoshiro256 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto inst = testing::random_transport_instance(rng, 2 + rng.below(8), 2 + rng.below(8));
    const double best = solve_transport(inst).total_cost;
    for (int r = 0; r < 100; ++r) {
      const auto plan = testing::random_feasible_plan(inst.supplies, inst.demands, rng);
      EXPECT_LE(best, (plan.array() * inst.costs.array()).sum() + 1e-12);
    }
  }
}

TEST(Transport, CostShiftEquivariance) {
  Xoshiro256 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto inst = testing::random_transport_instance(rng, 1 + rng.below(8), 1 + rng.below(8));
    const double gamma = 4.0 * rng.uniform() - 2.0;
    TransportInstance shifted = inst;
    shifted.costs.array() += gamma;
    const auto a = solve_transport(inst), b = solve_transport(shifted);
    EXPECT_NEAR(b.total_cost, a.total_cost + gamma, 1e-9);
    // the original optimal flows remain optimal under the shift
    EXPECT_NEAR((a.flows.array() * shifted.costs.array()).sum(), b.total_cost, 1e-9);
  }
}

TEST(NormalizeWeights, Examples) {
  EXPECT_EQ(normalize_weights(std::vector<double>{2, 2}), (std::vector<double>{0.5, 0.5}));
  const auto u = normalize_weights(std::vector<double>{0, 0, 0});
  for (double v : u) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  EXPECT_EQ(normalize_weights(std::vector<double>{1}), std::vector<double>{1});
  EXPECT_THROW(normalize_weights(std::vector<double>{1, -1}), std::invalid_argument);
}

}  // namespace
}  // namespace fsk
