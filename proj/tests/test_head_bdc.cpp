#include <cmath>

#include <gtest/gtest.h>

#include "fsk/head_bdc.hpp"
#include "fsk/testing/oracles.hpp"

namespace fsk {
namespace {

FeatureGrid random_grid(Xoshiro256& rng, Eigen::Index nodes, Eigen::Index channels) {
  Matrix m(nodes, channels);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return FeatureGrid{m};
}

TEST(BdcMatrix, IdenticalChannelsGiveZero) {
  const auto a = bdc_matrix(FeatureGrid{Matrix{{1.5, 1.5, 1.5}, {-2, -2, -2}}});
  EXPECT_EQ(a.values, Matrix::Zero(3, 3));
}

TEST(BdcMatrix, TwoChannelHandExample) {
  const auto a = bdc_matrix(FeatureGrid{Matrix{{0.0, 2.0}}});
  const Matrix expected = testing::naive_double_centering(Matrix{{0, 2}, {2, 0}});
  EXPECT_TRUE(expected.isApprox(Matrix{{-1, 1}, {1, -1}}));
  EXPECT_LE((a.values - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BdcMatrix, CenteredAndSymmetricOnRandomGrids) {
  Xoshiro256 rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto g = random_grid(rng, 1 + rng.below(25), 2 + rng.below(40));
    const auto a = bdc_matrix(g).values;
    EXPECT_LT(a.rowwise().sum().cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(a.colwise().sum().cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(BdcMatrix, MatchesNaiveDoubleCentering) {
  Xoshiro256 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto g = random_grid(rng, 4, 7);
    Matrix d(7, 7);
    for (int k = 0; k < 7; ++k)
      for (int l = 0; l < 7; ++l) d(k, l) = (g.nodes.col(k) - g.nodes.col(l)).norm();
    EXPECT_LE((bdc_matrix(g).values - testing::naive_double_centering(d)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BdcMatrix, PooledChannelsUseAbsoluteDifferences) {
  const auto a = bdc_matrix(FeatureGrid{Matrix{{1.0, 4.0, -1.0}}});
  const Matrix d{{0, 3, 2}, {3, 0, 5}, {2, 5, 0}};
  EXPECT_LE((a.values - testing::naive_double_centering(d)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BdcMatrix, SingleChannelRejected) {
  EXPECT_THROW(bdc_matrix(FeatureGrid{Matrix{{1.0}, {2.0}}}), std::invalid_argument);
}

TEST(BdcMatrix, ChannelPermutationEquivariance) {
  Xoshiro256 rng(3);
  for (int t = 0; t < 30; ++t) {
    const auto g = random_grid(rng, 6, 8);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(8);
    perm.setIdentity();
    for (int i = 7; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[rng.below(i + 1)]);
    const Matrix a = bdc_matrix(g).values;
    const Matrix b = bdc_matrix(FeatureGrid{g.nodes * perm.transpose()}).values;
    EXPECT_LE((b - perm * a * perm.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BdcPrototypes, MeansOfSlotMatrices) {
  Xoshiro256 rng(4);
  const auto a = bdc_matrix(random_grid(rng, 3, 4)), b = bdc_matrix(random_grid(rng, 3, 4));
  const auto p = bdc_prototypes(std::vector<std::vector<BdcMatrix>>{{a}, {a, a}, {a, b}, {b, a}});
  EXPECT_EQ(p[0].matrix, a.values);
  EXPECT_TRUE(p[1].matrix.isApprox(a.values));
  EXPECT_TRUE(p[2].matrix.isApprox(p[3].matrix));
  EXPECT_LT(p[2].matrix.rowwise().sum().cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(bdc_prototypes(std::vector<std::vector<BdcMatrix>>{{}}), std::invalid_argument);
  EXPECT_THROW(bdc_prototypes(std::vector<std::vector<BdcMatrix>>{{a}, {BdcMatrix{Matrix::Zero(3, 3)}}}),
               std::invalid_argument);
}

TEST(ClassifyBdc, EqualInnerProductsGiveHalf) {
  const std::vector<BdcPrototype> protos{{Matrix{{1, 0}, {0, 0}}}, {Matrix{{0, 0}, {0, 1}}}};
  const auto post = classify_bdc(protos, {Matrix::Identity(2, 2)}, 1.0);
  EXPECT_NEAR(post.probs[0], 0.5, 1e-15);
}

TEST(ClassifyBdc, IdenticalPrototypeWins) {
  const Matrix a = bdc_matrix(FeatureGrid{Matrix{{0, 1, 5}, {2, 2, 0}}}).values;
  const Matrix small = 0.1 * bdc_matrix(FeatureGrid{Matrix{{3, 0, 1}, {0, 1, 2}}}).values;
  const auto post = classify_bdc({{small}, {-small}, {a}}, {a}, 1.0);
  EXPECT_EQ(post.argmax(), 2u);
}

TEST(ClassifyBdc, HandSoftmaxOracle) {
  // inner products 3 and 1 against the identity query
  const std::vector<BdcPrototype> protos{{Matrix{{1, 0}, {0, 2}}}, {Matrix{{1, 0}, {0, 0}}}};
  const auto post = classify_bdc(protos, {Matrix::Identity(2, 2)}, 1.0);
  const double p0 = 1.0 / (1.0 + std::exp(-2.0));
  EXPECT_NEAR(post.probs[0], p0, 1e-15);
  EXPECT_NEAR(post.probs[0], 0.880797, 5e-7);
  EXPECT_NEAR(post.probs[1], 0.119203, 5e-7);
  EXPECT_NEAR(bdc_loss(post, 1), std::log1p(std::exp(2.0)), 1e-12);
  EXPECT_NEAR(bdc_loss(post, 1), 2.126928, 5e-7);
}

TEST(ClassifyBdc, LossExamples) {
  EXPECT_NEAR(bdc_loss(Posterior{{0.5, 0.5}}, 0), std::log(2.0), 1e-15);
  EXPECT_EQ(bdc_loss(Posterior{{0.0, 1.0}}, 1), 0.0);
}

TEST(ClassifyBdc, TauValidationAndArgmaxInvariance) {
  Xoshiro256 rng(5);
  std::vector<BdcPrototype> protos;
  for (int k = 0; k < 5; ++k) protos.push_back({bdc_matrix(random_grid(rng, 4, 6)).values});
  EXPECT_THROW(classify_bdc(protos, {protos[0].matrix}, 0.0), std::invalid_argument);
  EXPECT_THROW(classify_bdc(protos, {protos[0].matrix}, -1.0), std::invalid_argument);
  for (int t = 0; t < 100; ++t) {
    const BdcMatrix q = bdc_matrix(random_grid(rng, 4, 6));
    const auto ref = classify_bdc(protos, q, 1.0).argmax();
    for (double tau : {0.1, 10.0}) EXPECT_EQ(classify_bdc(protos, q, tau).argmax(), ref);
    double sum = 0.0;
    for (double p : classify_bdc(protos, q, 10.0).probs) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(ClassifyBdc, ChannelPermutationLeavesDecisionsUnchanged) {
  Xoshiro256 rng(6);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.setIdentity();
  for (int i = 4; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[rng.below(i + 1)]);
  for (int t = 0; t < 50; ++t) {
    GridGroups support(3), permuted(3);
    for (int s = 0; s < 3; ++s)
      for (int n = 0; n < 2; ++n) {
        support[s].push_back(random_grid(rng, 4, 5));
        permuted[s].push_back(FeatureGrid{support[s].back().nodes * perm.transpose()});
      }
    const auto q = random_grid(rng, 4, 5);
    const auto a = classify_bdc(bdc_prototypes(support), bdc_matrix(q), 1.0);
    const auto b = classify_bdc(bdc_prototypes(permuted), bdc_matrix(FeatureGrid{q.nodes * perm.transpose()}), 1.0);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.probs[k], b.probs[k], 1e-9);
  }
}

}  // namespace
}  // namespace fsk
