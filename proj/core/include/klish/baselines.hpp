#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "klish/kmeans.hpp"
#include "klish/svm.hpp"
#include "klish/types.hpp"

namespace klish {

enum class Linkage { kWardEuclidean, kAverageArccos };

/// "ward" / "arccos".
Linkage parse_linkage(std::string_view name);
std::string_view linkage_name(Linkage l);

struct AhcOptions {
  std::size_t max_samples = 20000;
  int threads = 0;
};

/// One agglomeration step. `a` and `b` are sample indices that represent the
/// two merged clusters (each the lowest index of a member it was built on).
struct AhcMerge {
  Eigen::Index a = 0;
  Eigen::Index b = 0;
  double height = 0.0;
};

/// N - 1 merges in non-decreasing height order. Ward heights are on the
/// squared-Euclidean scale.
std::vector<AhcMerge> ahc_tree(const FeatureDataset& d, Linkage linkage, const AhcOptions& opts = {});

/// Applies the first N - k merges. Labels are numbered by lowest member index.
ClusterAssignment cut_tree(const std::vector<AhcMerge>& merges, std::size_t n, int k);

ClusterAssignment ahc(const FeatureDataset& d, int k, Linkage linkage, const AhcOptions& opts = {});

/// Softmax classifier fit on AHC labels, used to label held-out samples.
LinearClassifier ahc_predictor(const FeatureDataset& train, const ClusterAssignment& a, const TrainOptions& opts);

struct KaspResult {
  ClusterAssignment assignment;
  /// Group of each intermediate centroid, length k0.
  ClusterAssignment centroid_groups;
  Matrix centroids;
  double sigma = 0.0;
};

/// Spectral grouping of points into k groups: Gaussian affinity with sigma set
/// to the median pairwise distance, symmetric normalized Laplacian, k smallest
/// eigenvectors, row normalization, K-means on the rows.
ClusterAssignment spectral_group(const Matrix& points, int k, std::uint64_t seed, double* sigma_out = nullptr);

/// K-means to k0 centroids, then spectral_group on the centroids.
KaspResult kasp(const FeatureDataset& d, int k, int k0, std::uint64_t seed, const KMeansOptions& opts = {});

}  // namespace klish
