#pragma once

#include <cstdint>
#include <vector>

#include "klish/types.hpp"

namespace klish {

struct KMeansOptions {
  double tol = 1e-4;   // L-inf centroid shift
  int max_iter = 300;
  int threads = 0;

  static KMeansOptions from(const RunConfig& cfg) { return {cfg.kmeans_tol, cfg.kmeans_max_iter, cfg.threads}; }
};

struct KMeansResult {
  Matrix centroids;
  ClusterAssignment assignment;
  int iterations = 0;
  bool converged = false;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> wcss_trace;
  /// Iterations (1-based) in which at least one empty cluster was relocated.
  std::vector<int> repaired_at;
};

/// D^2 seeding: first row uniform, each next row with probability proportional
/// to its squared distance to the nearest chosen row. Returns row indices.
std::vector<Eigen::Index> kmeanspp_seed_indices(const FeatureDataset& d, int k, std::uint64_t seed);
Matrix kmeanspp_seed(const FeatureDataset& d, int k, std::uint64_t seed);

/// Lloyd iterations from `init`. Ties go to the lowest centroid index; empty
/// clusters are moved onto the sample farthest from its own centroid.
KMeansResult lloyd(const FeatureDataset& d, Matrix init, const KMeansOptions& opts);

/// Full Lloyd re-run seeded with a subset of centroids.
KMeansResult kmeans_restart_with(const FeatureDataset& d, const Matrix& kept, const KMeansOptions& opts);

/// Nearest-centroid labels, ties to the lowest index. N may be zero.
ClusterAssignment kmeans_predict(const Matrix& x, const Matrix& centroids, int threads = 1);

double wcss(const Matrix& x, const Matrix& centroids, const ClusterAssignment& a);

/// Seeds with k-means++ and runs Lloyd.
KMeansResult kmeans(const FeatureDataset& d, int k, std::uint64_t seed, const KMeansOptions& opts);

}  // namespace klish
