#include <cmath>

#include <gtest/gtest.h>

#include "fsk/eval_runner.hpp"
#include "fsk/synthetic.hpp"

namespace fsk {
namespace {

TEST(ConfidenceInterval, Examples) {
  const auto a = confidence_interval(std::vector<double>{1, 1, 1, 1});
  EXPECT_EQ(a.mean, 1.0);
  EXPECT_EQ(a.halfwidth, 0.0);
  const auto b = confidence_interval(std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(b.mean, 0.5);
  EXPECT_NEAR(b.halfwidth, 1.96 * std::sqrt(0.5) / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(b.halfwidth, 0.980, 1e-6);
  const auto c = confidence_interval(std::vector<double>{0.7});
  EXPECT_EQ(c.mean, 0.7);
  EXPECT_EQ(c.halfwidth, 0.0);
  EXPECT_THROW(confidence_interval(std::vector<double>{}), std::invalid_argument);
}

TEST(ConfidenceInterval, MatchesTwoPassFormula) {
  Xoshiro256 rng(1);
  std::vector<double> v(37);
  for (auto& x : v) x = rng.uniform();
  double mean = 0.0;
  for (double x : v) mean += x / 37.0;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean) / 36.0;
  const auto ci = confidence_interval(v);
  EXPECT_NEAR(ci.mean, mean, 1e-12);
  EXPECT_NEAR(ci.halfwidth, 1.96 * std::sqrt(var / 37.0), 1e-12);
}

TEST(PooledVector, AveragesGridPositions) {
  const EmbeddingRecord rec{0, 0, {1, 2, 3, 4, 5, 6, 7, 8}};
  const Vector v = pooled_vector(rec, EmbeddingShape::grid(2, 2, 2));
  EXPECT_TRUE(v.isApprox(Vector{{4.0, 5.0}}));
}

TEST(RunBenchmark, PointDatasetPerfectForEveryHead) {
  for (auto shape : {EmbeddingShape::pooled(8), EmbeddingShape::grid(2, 2, 6)}) {
    const auto ds = make_point_dataset(5, 20, shape, 3);
    for (auto head : kAllHeads) {
      RunConfig cfg;
      cfg.head = head;
      cfg.spec = {5, 1, 15};
      cfg.episodes = 100;
      cfg.base_seed = 11;
      const auto r = run_benchmark(ds, cfg);
      EXPECT_EQ(r.mean_accuracy, 1.0) << head_name(head);
      EXPECT_EQ(r.per_episode_accuracy.size(), 100u);
    }
  }
}

TEST(RunBenchmark, WorkerCountDoesNotChangeResults) {
  GaussianDatasetSpec gs;
  gs.classes = 8;
  gs.per_class = 20;
  gs.shape = EmbeddingShape::grid(2, 2, 8);
  gs.separation = 0.8;
  const auto ds = make_gaussian_dataset(gs);
  for (auto head : kAllHeads) {
    RunConfig cfg;
    cfg.head = head;
    cfg.spec = {5, 2, 5};
    cfg.episodes = 60;
    cfg.base_seed = 99;
    cfg.workers = 1;
    const auto one = run_benchmark(ds, cfg);
    cfg.workers = 8;
    const auto eight = run_benchmark(ds, cfg);
    EXPECT_EQ(one.per_episode_accuracy, eight.per_episode_accuracy) << head_name(head);
    EXPECT_EQ(one.mean_accuracy, eight.mean_accuracy);
  }
}

TEST(RunBenchmark, EpisodeIUsesDerivedSeed) {
  GaussianDatasetSpec gs;
  gs.classes = 6;
  gs.per_class = 10;
  gs.shape = EmbeddingShape::pooled(4);
  gs.separation = 0.5;
  const auto ds = make_gaussian_dataset(gs);
  const auto index = build_class_index(ds);
  RunConfig cfg;
  cfg.spec = {5, 1, 3};
  cfg.episodes = 20;
  cfg.base_seed = 5;
  const auto r = run_benchmark(ds, cfg);
  for (std::size_t e = 0; e < 20; ++e) {
    const auto ep = sample_episode(ds, index, cfg.spec, derive_episode_seed(5, e));
    EXPECT_EQ(r.per_episode_accuracy[e], episode_accuracy(ds, ep, cfg));
  }
  double mean = 0.0;
  for (double a : r.per_episode_accuracy) mean += a;
  EXPECT_NEAR(r.mean_accuracy, mean / 20.0, 1e-15);
}

TEST(RunBenchmark, Errors) {
  const auto ds = make_point_dataset(4, 20, EmbeddingShape::pooled(1), 1);
  RunConfig cfg;
  cfg.spec = {5, 1, 15};
  cfg.episodes = 3;
  EXPECT_THROW(run_benchmark(ds, cfg), InsufficientSamples);
  cfg.spec = {3, 1, 5};
  cfg.head = HeadKind::deepbdc;
  EXPECT_THROW(run_benchmark(ds, cfg), DataError);
  cfg.head = HeadKind::protonet;
  cfg.episodes = 0;
  EXPECT_THROW(run_benchmark(ds, cfg), std::invalid_argument);
  cfg.episodes = 1;
  cfg.params.tau = 0.0;
  EXPECT_THROW(run_benchmark(ds, cfg), std::invalid_argument);
}

TEST(RunBenchmark, CenteringTransformUsesDatasetMean) {
  GaussianDatasetSpec gs;
  gs.classes = 6;
  gs.per_class = 20;
  gs.shape = EmbeddingShape::pooled(10);
  const auto ds = make_gaussian_dataset(gs);
  RunConfig cfg;
  cfg.head = HeadKind::simpleshot;
  cfg.spec = {5, 1, 5};
  cfg.episodes = 30;
  cfg.params.transform = TransformKind::center;
  const auto centered = run_benchmark(ds, cfg);
  cfg.params.transform = TransformKind::none;
  // centering alone is a translation: identical decisions
  EXPECT_EQ(centered.per_episode_accuracy, run_benchmark(ds, cfg).per_episode_accuracy);
  cfg.params.transform = TransformKind::center_then_l2;
  EXPECT_GT(run_benchmark(ds, cfg).mean_accuracy, 0.5);
}

TEST(HeadNames, RoundTrip) {
  for (auto h : kAllHeads) EXPECT_EQ(parse_head(head_name(h)), h);
  EXPECT_FALSE(parse_head("matchingnet").has_value());
}

}  // namespace
}  // namespace fsk
