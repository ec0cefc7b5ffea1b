#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace klish {

/// Row-major so that a sample is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Pixel-grid provenance of a flattened (B, H, W, D) feature block.
struct Spatial {
  std::size_t images = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t pixels() const { return images * height * width; }
  friend bool operator==(const Spatial&, const Spatial&) = default;
};

/// N x D block of sample features. Values are always stored as double.
struct FeatureDataset {
  Matrix data;
  std::optional<Spatial> spatial;

  Eigen::Index size() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

/// Per-sample cluster ids in [0, k).
struct ClusterAssignment {
  std::vector<int> labels;
  int k = 0;

  std::size_t size() const { return labels.size(); }
  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// One hyperplane per cluster: score_k(x) = weights.row(k) * x + biases(k).
struct LinearClassifier {
  Matrix weights;
  Vector biases;

  int clusters() const { return static_cast<int>(weights.rows()); }
  Eigen::Index dim() const { return weights.cols(); }

  static LinearClassifier zeros(int k, Eigen::Index d) {
    return {Matrix::Zero(k, d), Vector::Zero(k)};
  }
  /// Removes hyperplane `row`, shifting later rows up.
  LinearClassifier without_row(int row) const;
  /// Argmax of the scores for each sample, ties to the lowest index.
  ClusterAssignment predict(const Matrix& x) const;
};

bool operator==(const LinearClassifier& a, const LinearClassifier& b);

struct FilterReport {
  int pre_filter_k = 0;
  std::vector<double> iou_logits;
  double mean = 0.0;
  double std = 0.0;
  std::vector<int> kept;
  std::vector<int> dropped;

  friend bool operator==(const FilterReport&, const FilterReport&) = default;
};

struct MergeRecord {
  int step = 0;
  LinearClassifier classifier;  // snapshot before row deletion
  int cluster_count = 0;
  int merged_from = 0;
  int merged_into = 0;
  double min_iou = 0.0;
  double ecos = 0.0;
  std::vector<double> per_cluster_iou;

  friend bool operator==(const MergeRecord&, const MergeRecord&) = default;
};

struct MergeHistory {
  std::vector<MergeRecord> records;
  int initial_k = 0;
  FilterReport filter_report;

  friend bool operator==(const MergeHistory&, const MergeHistory&) = default;
};

enum class SvmInit { kZeros, kCentroids };

struct RunConfig {
  int k0 = 100;
  double lambda1 = 5000.0;
  double svm_tol = 1e-4;
  int svm_max_iter = 1000;
  double kmeans_tol = 1e-4;
  int kmeans_max_iter = 300;
  std::optional<double> stop_iou;
  std::uint64_t seed = 0;
  int threads = 0;
  bool deterministic = true;
  SvmInit svm_init = SvmInit::kZeros;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws InvalidArgument when a RunConfig invariant is broken.
void validate_config(const RunConfig& cfg);

struct Violation {
  enum class Kind { kNonFinite, kSpatialMismatch, kEmpty };
  Kind kind;
  Eigen::Index row = -1;
  Eigen::Index col = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Report-only check of the FeatureDataset invariants.
ValidationReport validate_dataset(const FeatureDataset& d);
/// Throws InvalidArgument with the first violation if `d` is invalid.
void require_valid(const FeatureDataset& d);

/// Throws InvalidArgument unless every label lies in [0, k) and k >= 1.
void require_valid(const ClusterAssignment& a);

/// Number of samples carrying each label; length k.
std::vector<std::size_t> cluster_census(const ClusterAssignment& a);

}  // namespace klish
