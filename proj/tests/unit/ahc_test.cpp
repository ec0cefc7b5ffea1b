#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "klish/baselines.hpp"
#include "klish/error.hpp"
#include "klish/synth.hpp"
#include "oracles.hpp"

namespace klish {
namespace {

// Brute-force agglomeration: recompute every cluster-pair distance from the
// member sets at each step, merge the closest pair (lowest pair on ties).
struct NaiveStep {
  double height;
  std::vector<int> labels;  // partition after this merge, labeled by lowest member
};

std::vector<NaiveStep> naive_ahc(const Matrix& x, Linkage linkage) {
  const int n = static_cast<int>(x.rows());
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) clusters[static_cast<std::size_t>(i)] = {i};
  auto point_angle = [&](int i, int j) {
    const double c = x.row(i).dot(x.row(j)) / (x.row(i).norm() * x.row(j).norm());
    return std::acos(std::clamp(c, -1.0, 1.0));
  };
  auto dist = [&](const std::vector<int>& a, const std::vector<int>& b) {
    if (linkage == Linkage::kWardEuclidean) {
      Eigen::RowVectorXd ca = Eigen::RowVectorXd::Zero(x.cols()), cb = ca;
      for (int i : a) ca += x.row(i);
      for (int i : b) cb += x.row(i);
      ca /= static_cast<double>(a.size());
      cb /= static_cast<double>(b.size());
      const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
      return 2.0 * na * nb / (na + nb) * (ca - cb).squaredNorm();
    }
    double s = 0.0;
    for (int i : a)
      for (int j : b) s += point_angle(i, j);
    return s / static_cast<double>(a.size() * b.size());
  };
  std::vector<NaiveStep> out;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double v = dist(clusters[i], clusters[j]);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    NaiveStep step{best, std::vector<int>(static_cast<std::size_t>(n))};
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (int i : clusters[c]) step.labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
    out.push_back(step);
  }
  return out;
}

TEST(Ahc, KEqualsNKeepsSingletons) {
  std::mt19937_64 gen(1);
  const auto d = testing::random_dataset(12, 3, gen);
  const auto a = ahc(d, 12, Linkage::kWardEuclidean);
  EXPECT_EQ(a.k, 12);
  std::vector<int> expected(12);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(a.labels, expected);
}

TEST(Ahc, FarBlobsAreRecovered) {
  const auto blobs = synth::gen_blobs(2, 60, 3, 100.0, 2);
  for (Linkage l : {Linkage::kWardEuclidean, Linkage::kAverageArccos}) {
    auto d = blobs.data;
    if (l == Linkage::kAverageArccos) d.data.array() += 1000.0;  // keep vectors away from the origin
    const auto a = ahc(d, 2, l);
    if (l == Linkage::kWardEuclidean) {
      EXPECT_EQ(testing::naive_ari(a.labels, blobs.labels.labels), 1.0);
    }
    EXPECT_EQ(a.k, 2);
  }
}

TEST(Ahc, WardFivePointsByHand) {
  // 0, 1, 3, 7, 15 on a line; heights are 2 n_a n_b / (n_a + n_b) * |c_a - c_b|^2.
  const FeatureDataset d{Matrix{{0.0}, {1.0}, {3.0}, {7.0}, {15.0}}, std::nullopt};
  const auto tree = ahc_tree(d, Linkage::kWardEuclidean);
  ASSERT_EQ(tree.size(), 4u);
  const double expected[4] = {1.0, 25.0 / 3.0, 289.0 / 6.0, 1.6 * 12.25 * 12.25};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(tree[static_cast<std::size_t>(i)].height, expected[i], 1e-9) << i;
  EXPECT_EQ(cut_tree(tree, 5, 3).labels, (std::vector<int>{0, 0, 0, 1, 2}));
  EXPECT_EQ(cut_tree(tree, 5, 2).labels, (std::vector<int>{0, 0, 0, 0, 1}));
}

class AhcOracle : public ::testing::TestWithParam<Linkage> {};

TEST_P(AhcOracle, MatchesBruteForce) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = testing::random_dataset(14, 3, gen);
    const auto naive = naive_ahc(d.data, GetParam());
    const auto tree = ahc_tree(d, GetParam());
    ASSERT_EQ(tree.size(), naive.size());
    for (std::size_t s = 0; s < tree.size(); ++s) {
      EXPECT_NEAR(tree[s].height, naive[s].height, 1e-9 * std::max(1.0, naive[s].height));
      const int k = static_cast<int>(naive.size() - s);
      EXPECT_EQ(testing::naive_ari(cut_tree(tree, 14, k).labels, naive[s].labels), 1.0) << "k=" << k;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Linkages, AhcOracle, ::testing::Values(Linkage::kWardEuclidean, Linkage::kAverageArccos));

TEST(Ahc, HeightsAreMonotone) {
  std::mt19937_64 gen(4);
  const auto d = testing::random_dataset(200, 4, gen);
  for (Linkage l : {Linkage::kWardEuclidean, Linkage::kAverageArccos}) {
    const auto tree = ahc_tree(d, l);
    for (std::size_t i = 1; i < tree.size(); ++i) EXPECT_LE(tree[i - 1].height, tree[i].height);
  }
}

TEST(Ahc, Errors) {
  FeatureDataset zero{Matrix{{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}}, std::nullopt};
  EXPECT_THROW(ahc(zero, 2, Linkage::kAverageArccos), InvalidArgument);
  EXPECT_NO_THROW(ahc(zero, 2, Linkage::kWardEuclidean));
  std::mt19937_64 gen(5);
  const auto d = testing::random_dataset(30, 2, gen);
  AhcOptions opts;
  opts.max_samples = 29;
  EXPECT_THROW(ahc(d, 2, Linkage::kWardEuclidean, opts), InvalidArgument);
  EXPECT_THROW(ahc(d, 0, Linkage::kWardEuclidean), InvalidArgument);
  EXPECT_THROW(ahc(d, 31, Linkage::kWardEuclidean), InvalidArgument);
  EXPECT_THROW(parse_linkage("single"), InvalidArgument);
  EXPECT_EQ(parse_linkage("arccos"), Linkage::kAverageArccos);
}

TEST(AhcPredictor, ReproducesLabelsOnSeparableData) {
  const auto blobs = synth::gen_blobs(3, 80, 2, 12.0, 6);
  const auto a = ahc(blobs.data, 3, Linkage::kWardEuclidean);
  const auto c = ahc_predictor(blobs.data, a, {});
  const auto pred = c.predict(blobs.data.data);
  int agree = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) agree += pred.labels[i] == a.labels[i];
  EXPECT_GE(agree, static_cast<int>(0.99 * static_cast<double>(pred.size())));
}

TEST(AhcPredictor, SingleClusterIsConstant) {
  std::mt19937_64 gen(7);
  const auto d = testing::random_dataset(20, 3, gen);
  const auto c = ahc_predictor(d, {std::vector<int>(20, 0), 1}, {});
  EXPECT_EQ(c.clusters(), 1);
  for (int l : c.predict(d.data).labels) EXPECT_EQ(l, 0);
}

TEST(AhcPredictor, ShapeMismatch) {
  std::mt19937_64 gen(8);
  const auto d = testing::random_dataset(20, 3, gen);
  EXPECT_THROW(ahc_predictor(d, {std::vector<int>(19, 0), 2}, {}), InvalidArgument);
  EXPECT_THROW(ahc_predictor(d, {std::vector<int>(19, 0), 1}, {}), InvalidArgument);
}

}  // namespace
}  // namespace klish
