#include <gtest/gtest.h>

#include "klish/softmax.hpp"
#include "oracles.hpp"

namespace klish {
namespace {

std::vector<double> flatten(const ClassifierGradient& g) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < g.weights.rows(); ++k)
    for (Eigen::Index j = 0; j < g.weights.cols(); ++j) out.push_back(g.weights(k, j));
  for (Eigen::Index k = 0; k < g.biases.size(); ++k) out.push_back(g.biases(k));
  return out;
}

TEST(SoftmaxObjective, MatchesNaive) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 10; ++t) {
    const auto d = testing::random_dataset(25, 3, gen);
    const auto a = testing::random_assignment(25, 4, gen);
    const auto c = testing::random_classifier(4, 3, gen);
    const double naive = testing::naive_softmax_objective(c, d.data, a, 7.0);
    EXPECT_NEAR(softmax_objective(c, d, a, 7.0), naive, 1e-12 * naive);
  }
}

TEST(SoftmaxObjective, StableForLargeScores) {
  const FeatureDataset d{Matrix{{1000.0}, {-1000.0}}, std::nullopt};
  const LinearClassifier c{Matrix{{1.0}, {-1.0}}, Vector::Zero(2)};
  const double v = softmax_objective(c, d, {{0, 1}, 2}, 1.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 0.5, 1e-12);  // data term underflows to 0, ridge = 2 / 4
}

TEST(SoftmaxGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 30; ++t) {
    const auto d = testing::random_dataset(20, 3, gen);
    const auto a = testing::random_assignment(20, 3, gen);
    const auto c = testing::random_classifier(3, 3, gen, 0.5);
    const auto fd = testing::finite_difference(
        [&](const LinearClassifier& p) { return testing::naive_softmax_objective(p, d.data, a, 50.0); }, c, 1e-5);
    const auto g = flatten(softmax_gradient(c, d, a, 50.0));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], fd[i], 1e-5 * std::max(1.0, std::fabs(fd[i])));
  }
}

TEST(TrainSoftmax, MirroredDataGivesMirroredWeights) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 0.7);
  FeatureDataset d{Matrix(200, 2), std::nullopt};
  ClusterAssignment a{{}, 2};
  for (int i = 0; i < 100; ++i) {
    const Eigen::RowVector2d p(1.0 + nd(gen), 2.0 + nd(gen));
    d.data.row(2 * i) = p;
    d.data.row(2 * i + 1) = -p;
    a.labels.push_back(0);
    a.labels.push_back(1);
  }
  TrainOptions opts;
  opts.lambda1 = 100.0;
  opts.tol = 1e-8;
  const auto [c, diag] = train_softmax(LinearClassifier::zeros(2, 2), d, a, opts);
  const Eigen::RowVectorXd mean = c.weights.colwise().mean();
  const Matrix centered = c.weights.rowwise() - mean;
  EXPECT_LT((centered.row(0) + centered.row(1)).norm(), 1e-3);
  EXPECT_LT(std::fabs(c.biases(0) - c.biases(1)), 1e-3);
  EXPECT_GT(c.weights.row(0).dot(Eigen::RowVector2d(1.0, 2.0)), 0.0);
}

TEST(TrainSoftmax, SeparableDataIsFit) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd(0.0, 0.3);
  const Matrix centers{{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}};
  FeatureDataset d{Matrix(300, 2), std::nullopt};
  ClusterAssignment a{{}, 3};
  for (int i = 0; i < 300; ++i) {
    d.data.row(i) = centers.row(i % 3) + Eigen::RowVector2d(nd(gen), nd(gen));
    a.labels.push_back(i % 3);
  }
  const auto [c, diag] = train_softmax(LinearClassifier::zeros(3, 2), d, a, {});
  const auto pred = c.predict(d.data);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred.labels[i] == a.labels[i];
  EXPECT_GE(correct, 297);
  const auto [again, diag2] = train_softmax(c, d, a, {});
  EXPECT_LE(diag2.iterations, 1);
  EXPECT_TRUE(diag2.converged);
}

}  // namespace
}  // namespace klish
