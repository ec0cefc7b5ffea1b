#include <gtest/gtest.h>

#include <set>

#include "klish/error.hpp"
#include "klish/kmeans.hpp"
#include "klish/parallel.hpp"
#include "oracles.hpp"

namespace klish {
namespace {

FeatureDataset blobs(const Matrix& centers, int per, double sigma, std::uint64_t seed, ClusterAssignment* gt = nullptr) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  FeatureDataset d{Matrix(centers.rows() * per, centers.cols()), std::nullopt};
  if (gt) *gt = {{}, static_cast<int>(centers.rows())};
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (int i = 0; i < per; ++i) {
      for (Eigen::Index j = 0; j < centers.cols(); ++j) d.data(c * per + i, j) = centers(c, j) + nd(gen);
      if (gt) gt->labels.push_back(static_cast<int>(c));
    }
  }
  return d;
}

const Matrix kTriangle{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.8660254037844386}};

TEST(KMeansPP, KEqualsNSelectsEveryRowOnce) {
  std::mt19937_64 gen(1);
  const auto d = testing::random_dataset(25, 3, gen);
  const auto idx = kmeanspp_seed_indices(d, 25, 9);
  EXPECT_EQ(std::set<Eigen::Index>(idx.begin(), idx.end()).size(), 25u);
}

TEST(KMeansPP, SingleSeedIsADataRow) {
  std::mt19937_64 gen(2);
  const auto d = testing::random_dataset(10, 2, gen);
  const auto c = kmeanspp_seed(d, 1, 4);
  ASSERT_EQ(c.rows(), 1);
  bool found = false;
  for (int i = 0; i < 10; ++i) found = found || c.row(0) == d.data.row(i);
  EXPECT_TRUE(found);
}

TEST(KMeansPP, SingleSeedCoversRowsUniformly) {
  std::mt19937_64 gen(3);
  const auto d = testing::random_dataset(4, 1, gen);
  std::vector<int> hits(4, 0);
  for (std::uint64_t s = 0; s < 4000; ++s) ++hits[static_cast<std::size_t>(kmeanspp_seed_indices(d, 1, s)[0])];
  // Binomial(4000, 1/4): mean 1000, sd ~27.
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(KMeansPP, TwoFarBlobsGetOneSeedEach) {
  const Matrix centers{{0.0, 0.0}, {100.0, 0.0}};
  const auto d = blobs(centers, 50, 1.0, 7);
  int split = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto idx = kmeanspp_seed_indices(d, 2, s);
    split += (idx[0] < 50) != (idx[1] < 50);
  }
  // D^2 weight of the other blob is about 1e4 against O(1) within a blob.
  EXPECT_GE(split, 198);
}

TEST(KMeansPP, MoreSeedsThanRowsIsError) {
  std::mt19937_64 gen(4);
  const auto d = testing::random_dataset(3, 2, gen);
  EXPECT_THROW(kmeanspp_seed(d, 4, 0), InvalidArgument);
}

TEST(KMeansPP, DuplicateRowsStillGiveDistinctIndices) {
  FeatureDataset d{Matrix::Ones(6, 2), std::nullopt};
  const auto idx = kmeanspp_seed_indices(d, 4, 0);
  EXPECT_EQ(std::set<Eigen::Index>(idx.begin(), idx.end()).size(), 4u);
}

TEST(Lloyd, PointsAtCentroidsConvergeImmediately) {
  const FeatureDataset d{kTriangle, std::nullopt};
  const auto r = lloyd(d, kTriangle, {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.assignment.labels, (std::vector<int>{0, 1, 2}));
}

TEST(Lloyd, SingleClusterIsColumnMean) {
  std::mt19937_64 gen(5);
  const auto d = testing::random_dataset(40, 3, gen);
  const auto r = lloyd(d, d.data.topRows(1), {});
  EXPECT_LT((r.centroids.row(0) - d.data.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lloyd, RecoversTriangleBlobs) {
  ClusterAssignment gt;
  const auto d = blobs(kTriangle, 100, 0.1, 11, &gt);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = kmeans(d, 3, s, {});
    EXPECT_EQ(testing::naive_ari(r.assignment.labels, gt.labels), 1.0) << "seed " << s;
  }
}

TEST(Lloyd, WcssNonIncreasingBetweenRepairs) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 10; ++t) {
    const auto d = testing::random_dataset(300, 4, gen);
    const auto r = kmeans(d, 12, static_cast<std::uint64_t>(t), {});
    for (std::size_t i = 1; i < r.wcss_trace.size(); ++i) {
      const bool repaired = std::find(r.repaired_at.begin(), r.repaired_at.end(), static_cast<int>(i)) != r.repaired_at.end();
      if (!repaired) {
        EXPECT_LE(r.wcss_trace[i], r.wcss_trace[i - 1] + 1e-9);
      }
    }
  }
}

TEST(Lloyd, EmptyClusterIsRepaired) {
  const auto d = blobs(kTriangle, 30, 0.05, 12);
  Matrix init(4, 2);
  init << kTriangle, Eigen::RowVector2d(50.0, 50.0);
  const auto r = lloyd(d, init, {});
  EXPECT_FALSE(r.repaired_at.empty());
  for (auto c : cluster_census(r.assignment)) EXPECT_GT(c, 0u);
}

TEST(Lloyd, BitIdenticalAcrossThreadCounts) {
  std::mt19937_64 gen(7);
  const auto d = testing::random_dataset(3 * static_cast<int>(kRowChunk) + 17, 5, gen);
  KMeansOptions opts;
  opts.threads = 1;
  const auto base = kmeans(d, 9, 42, opts);
  for (int threads : {2, 4, 8}) {
    opts.threads = threads;
    const auto r = kmeans(d, 9, 42, opts);
    EXPECT_EQ(r.centroids, base.centroids) << threads;
    EXPECT_EQ(r.assignment, base.assignment) << threads;
    EXPECT_EQ(r.wcss_trace, base.wcss_trace) << threads;
  }
}

TEST(KMeansPredict, TieGoesToLowestIndex) {
  const Matrix c{{-1.0, 0.0}, {1.0, 0.0}};
  EXPECT_EQ(kmeans_predict(Matrix{{0.0, 3.0}}, c).labels, (std::vector<int>{0}));
}

TEST(KMeansPredict, EmptyDataset) {
  const auto a = kmeans_predict(Matrix(0, 2), kTriangle);
  EXPECT_TRUE(a.labels.empty());
  EXPECT_EQ(a.k, 3);
}

TEST(KMeansPredict, MatchesLloydAssignment) {
  std::mt19937_64 gen(8);
  const auto d = testing::random_dataset(500, 3, gen);
  const auto r = kmeans(d, 7, 1, {});
  EXPECT_EQ(kmeans_predict(d.data, r.centroids), r.assignment);
}

TEST(KMeansPredict, DimensionMismatch) {
  EXPECT_THROW(kmeans_predict(Matrix::Zero(2, 3), kTriangle), InvalidArgument);
}

TEST(KMeansRestart, ConvergedCentroidsAreAFixedPoint) {
  const auto d = blobs(kTriangle, 50, 0.1, 13);
  const auto r = kmeans(d, 3, 0, {});
  const auto again = kmeans_restart_with(d, r.centroids, {});
  EXPECT_EQ(again.assignment, r.assignment);
  EXPECT_LT((again.centroids - r.centroids).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KMeansRestart, OneCentroidGivesDataMean) {
  const auto d = blobs(kTriangle, 20, 0.1, 14);
  const auto r = kmeans_restart_with(d, kTriangle.topRows(1), {});
  EXPECT_EQ(r.assignment.k, 1);
  EXPECT_LT((r.centroids.row(0) - d.data.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KMeansRestart, DropOneOfFour) {
  const auto d = blobs(kTriangle, 50, 0.1, 15);
  const auto r = kmeans(d, 4, 3, {});
  const Matrix kept = r.centroids.topRows(3);
  const auto again = kmeans_restart_with(d, kept, {});
  std::size_t occupied = 0;
  for (auto c : cluster_census(again.assignment)) occupied += c > 0;
  EXPECT_LE(occupied, 3u);
  EXPECT_TRUE(std::isfinite(wcss(d.data, again.centroids, again.assignment)));
  EXPECT_THROW(kmeans_restart_with(d, Matrix(0, 2), {}), InvalidArgument);
}

}  // namespace
}  // namespace klish
