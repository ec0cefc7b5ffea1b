#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "klish/error.hpp"
#include "klish/metrics.hpp"
#include "oracles.hpp"

namespace klish::metrics {
namespace {

using klish::testing::labels;

ClusterAssignment random_labels(int n, int k, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> u(0, k - 1);
  ClusterAssignment a{{}, k};
  for (int i = 0; i < n; ++i) a.labels.push_back(u(gen));
  return a;
}

TEST(Contingency, Counts) {
  const auto t = contingency(labels({0, 0, 1, 2}, 3), labels({1, 1, 0, 0}, 2));
  EXPECT_EQ(t.rows, 3);
  EXPECT_EQ(t.cols, 2);
  EXPECT_EQ(t.at(0, 1), 2);
  EXPECT_EQ(t.at(2, 0), 1);
  EXPECT_EQ(t.row_sums, (std::vector<std::int64_t>{2, 1, 1}));
  EXPECT_EQ(t.col_sums, (std::vector<std::int64_t>{2, 2}));
  EXPECT_EQ(t.n, 4);
  EXPECT_THROW(contingency(labels({0, 1}, 2), labels({0}, 1)), InvalidArgument);
}

TEST(Ari, IdenticalAndRelabeled) {
  const auto a = labels({0, 0, 1, 1, 2, 2, 2}, 3);
  EXPECT_EQ(ari(contingency(a, a)), 1.0);
  const auto b = labels({2, 2, 0, 0, 1, 1, 1}, 3);
  EXPECT_EQ(ari(contingency(a, b)), 1.0);
}

TEST(Ari, MatchesPairCounting) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 50; ++t) {
    const auto u = random_labels(40, 2 + t % 4, gen), v = random_labels(40, 2 + t % 3, gen);
    EXPECT_NEAR(ari(contingency(u, v)), testing::naive_ari(u.labels, v.labels), 1e-12);
  }
}

TEST(Ari, TrivialPartitions) {
  const auto one = labels({0, 0, 0, 0}, 1);
  EXPECT_EQ(ari(contingency(one, one)), 1.0);
  EXPECT_EQ(ari(contingency(one, labels({0, 1, 0, 1}, 2))), 0.0);
}

TEST(Ami, IdenticalAndRelabeled) {
  const auto a = labels({0, 0, 1, 1, 2, 2, 2, 1}, 3);
  EXPECT_NEAR(ami(contingency(a, a)), 1.0, 1e-12);
  const auto b = labels({1, 1, 2, 2, 0, 0, 0, 2}, 3);
  EXPECT_NEAR(ami(contingency(a, b)), 1.0, 1e-12);
}

TEST(Ami, FixedTableMatchesDirectSummation) {
  // 3 x 3 table, N = 60.
  const std::vector<std::vector<int>> table{{10, 3, 2}, {4, 12, 5}, {1, 6, 17}};
  ClusterAssignment u{{}, 3}, v{{}, 3};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; ++c) {
        u.labels.push_back(i);
        v.labels.push_back(j);
      }
  const auto t = contingency(u, v);
  ASSERT_EQ(t.n, 60);
  const double mi = testing::naive_mi(u.labels, v.labels);
  const double emi = testing::naive_emi(t.row_sums, t.col_sums);
  const double h = 0.5 * (testing::naive_entropy(u.labels) + testing::naive_entropy(v.labels));
  EXPECT_NEAR(mutual_information(t), mi, 1e-12);
  EXPECT_NEAR(expected_mutual_information(t), emi, 1e-10);
  EXPECT_NEAR(ami(t), (mi - emi) / (h - emi), 1e-10);
}

TEST(Ami, ExpectedMiEqualsPermutationAverage) {
  // E[MI] under the permutation model, by enumerating all 7! orderings.
  const std::vector<int> u{0, 0, 0, 1, 1, 2, 2};
  std::vector<int> v{0, 0, 1, 1, 1, 1, 2};
  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0.0;
  int count = 0;
  do {
    std::vector<int> pv(7);
    for (int i = 0; i < 7; ++i) pv[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    total += testing::naive_mi(u, pv);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const auto t = contingency(labels(u, 3), labels(v, 3));
  EXPECT_NEAR(expected_mutual_information(t), total / count, 1e-12);
}

TEST(Ami, RandomTablesMatchDirectSummation) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_labels(80, 2 + trial % 5, gen), v = random_labels(80, 2 + trial % 4, gen);
    const auto t = contingency(u, v);
    EXPECT_NEAR(expected_mutual_information(t), testing::naive_emi(t.row_sums, t.col_sums), 1e-10);
  }
}

TEST(Ami, DegenerateCases) {
  const auto one = labels({0, 0, 0, 0}, 1);
  EXPECT_EQ(ami(contingency(one, one)), 1.0);
  EXPECT_EQ(ami(contingency(one, labels({0, 1, 0, 1}, 2))), 0.0);
  const auto singletons = labels({0, 1, 2, 3}, 4);
  EXPECT_EQ(ami(contingency(singletons, singletons)), 1.0);
}

TEST(Calibration, IndependentLabelingsScoreNearZero) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = contingency(random_labels(10000, 10, gen), random_labels(10000, 8, gen));
    EXPECT_LT(std::fabs(ari(t)), 0.05);
    EXPECT_LT(std::fabs(ami(t)), 0.05);
  }
}

TEST(JObjective, MatchesDirectSetEvaluation) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> am(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto gt = random_labels(25, 3, gen), pred = random_labels(25, 4, gen);
    std::vector<int> a(4);
    for (int& x : a) x = am(gen);
    EXPECT_NEAR(j_objective(a, contingency(pred, gt)), testing::naive_j(a, gt.labels, pred.labels, 3), 1e-12);
  }
}

TEST(JObjective, ExactUnionTermIsStable) {
  // Clusters 0 and 1 exactly cover class 0; moving cluster 2 never changes that term.
  const auto gt = labels({0, 0, 0, 1, 1}, 2);
  const auto pred = labels({0, 0, 1, 2, 2}, 3);
  const auto t = contingency(pred, gt);
  for (int m2 = 0; m2 <= 2; ++m2) {
    const auto iou = per_class_iou({1, 1, m2}, t);
    EXPECT_EQ(iou[0], m2 == 1 ? 3.0 / 5.0 : 1.0);
  }
  EXPECT_THROW(j_objective({1, 1}, t), InvalidArgument);
  EXPECT_THROW(j_objective({1, 1, 3}, t), InvalidArgument);
}

TEST(MiouGreedy, IdenticalPartition) {
  const auto gt = labels({0, 1, 1, 2, 2, 2}, 3);
  const auto r = miou_greedy(gt, gt);
  EXPECT_EQ(r.miou, 1.0);
  EXPECT_EQ(r.match, (MatchVector{1, 2, 3}));
  const auto relabeled = labels({2, 0, 0, 1, 1, 1}, 3);
  const auto r2 = miou_greedy(gt, relabeled);
  EXPECT_EQ(r2.miou, 1.0);
  EXPECT_EQ(r2.match, (MatchVector{2, 3, 1}));
}

TEST(MiouGreedy, OversegmentationIsMerged) {
  const auto gt = labels({0, 0, 0, 0, 1, 1}, 2);
  const auto pred = labels({0, 0, 1, 1, 2, 2}, 3);
  const auto r = miou_greedy(gt, pred);
  EXPECT_EQ(r.miou, 1.0);
  EXPECT_EQ(r.match, (MatchVector{1, 1, 2}));
  ASSERT_EQ(r.j_trace.size(), 3u);
  EXPECT_EQ(r.j_trace.back(), 2.0);
}

TEST(MiouGreedy, EveryClusterEndsMatched) {
  // Cluster 3 holds one straggler from each class; matching it anywhere lowers J,
  // but every cluster is still assigned.
  const auto gt = labels({0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 0, 1, 2}, 3);
  const auto pred = labels({0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3}, 4);
  const auto r = miou_greedy(gt, pred);
  for (int a : r.match) EXPECT_GE(a, 1);
  ASSERT_EQ(r.j_trace.size(), 4u);
  EXPECT_NEAR(r.j_trace[2], 2.4, 1e-12);
  EXPECT_NEAR(r.j_trace[3], 1.6 + 5.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.miou, r.j_trace.back() / 3.0);
}

TEST(MiouGreedy, TiesGoToLowestPair) {
  const auto gt = labels({0, 1}, 2);
  const auto pred = labels({0, 0}, 1);
  EXPECT_EQ(miou_greedy(gt, pred).match, (MatchVector{1}));
}

TEST(MiouExhaustive, HandInstanceByEnumeration) {
  const auto gt = labels({0, 0, 0, 1, 1, 1, 1}, 2);
  const auto pred = labels({0, 0, 1, 1, 1, 2, 2}, 3);
  double best = -1.0;
  std::vector<int> best_a;
  for (int a0 = 0; a0 <= 2; ++a0)
    for (int a1 = 0; a1 <= 2; ++a1)
      for (int a2 = 0; a2 <= 2; ++a2) {
        const std::vector<int> a{a0, a1, a2};
        const double j = testing::naive_j(a, gt.labels, pred.labels, 2);
        if (j > best) {
          best = j;
          best_a = a;
        }
      }
  const auto r = miou_exhaustive(gt, pred);
  EXPECT_DOUBLE_EQ(r.miou, best / 2.0);
  EXPECT_EQ(r.match, best_a);
}

TEST(MiouExhaustive, Guard) {
  const ClusterAssignment pred{std::vector<int>(20), 20};
  const ClusterAssignment gt{std::vector<int>(20), 3};
  EXPECT_THROW(miou_exhaustive(gt, pred), InvalidArgument);
}

TEST(MiouExhaustive, DominatesGreedy) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> kk(1, 5), mm(1, 3), nn(1, 30);
  int equal = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const int n = nn(gen);
    const auto gt = random_labels(n, mm(gen), gen), pred = random_labels(n, kk(gen), gen);
    const auto tab = contingency(pred, gt);
    const double g = miou_greedy(tab).miou, e = miou_exhaustive(tab).miou;
    EXPECT_LE(g, e + 1e-12);
    equal += std::fabs(g - e) <= 1e-12;
  }
  EXPECT_GE(equal, 950);
}

}  // namespace
}  // namespace klish::metrics
