#include "klish/types.hpp"

#include <cmath>
#include <sstream>

#include "klish/error.hpp"

namespace klish {

LinearClassifier LinearClassifier::without_row(int row) const {
  const int k = clusters();
  if (row < 0 || row >= k) throw InvalidArgument("without_row: row out of range");
  LinearClassifier out{Matrix(k - 1, dim()), Vector(k - 1)};
  for (int src = 0, dst = 0; src < k; ++src) {
    if (src == row) continue;
    out.weights.row(dst) = weights.row(src);
    out.biases(dst) = biases(src);
    ++dst;
  }
  return out;
}

ClusterAssignment LinearClassifier::predict(const Matrix& x) const {
  if (x.cols() != dim()) throw InvalidArgument("predict: feature dimension mismatch");
  ClusterAssignment out;
  out.k = clusters();
  out.labels.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_score = weights.row(0).dot(x.row(i)) + biases(0);
    for (int k = 1; k < clusters(); ++k) {
      const double s = weights.row(k).dot(x.row(i)) + biases(k);
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

bool operator==(const LinearClassifier& a, const LinearClassifier& b) {
  return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
         a.biases.size() == b.biases.size() && a.weights == b.weights && a.biases == b.biases;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.k0 < 2) throw InvalidArgument("k0 must be >= 2");
  if (!(cfg.lambda1 > 0.0)) throw InvalidArgument("lambda1 must be > 0");
  if (!(cfg.svm_tol > 0.0) || !(cfg.kmeans_tol > 0.0))
    throw InvalidArgument("tolerances must be > 0");
  if (cfg.svm_max_iter < 1 || cfg.kmeans_max_iter < 1)
    throw InvalidArgument("iteration caps must be >= 1");
  if (cfg.threads < 0) throw InvalidArgument("threads must be >= 0");
}

ValidationReport validate_dataset(const FeatureDataset& d) {
  ValidationReport report;
  if (d.size() < 1 || d.dim() < 1) {
    report.violations.push_back({Violation::Kind::kEmpty, -1, -1, "dataset needs N >= 1 and D >= 1"});
  }
  for (Eigen::Index i = 0; i < d.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.data.cols(); ++j) {
      if (!std::isfinite(d.data(i, j))) {
        std::ostringstream msg;
        msg << "non-finite value at (" << i << "," << j << ")";
        report.violations.push_back({Violation::Kind::kNonFinite, i, j, msg.str()});
      }
    }
  }
  if (d.spatial && d.spatial->pixels() != static_cast<std::size_t>(d.size())) {
    std::ostringstream msg;
    msg << "spatial shape " << d.spatial->images << "x" << d.spatial->height << "x"
        << d.spatial->width << " does not cover N=" << d.size();
    report.violations.push_back({Violation::Kind::kSpatialMismatch, -1, -1, msg.str()});
  }
  return report;
}

void require_valid(const FeatureDataset& d) {
  const auto report = validate_dataset(d);
  if (!report.ok()) throw InvalidArgument(report.violations.front().message);
}

void require_valid(const ClusterAssignment& a) {
  if (a.k < 1) throw InvalidArgument("assignment needs k >= 1");
  for (int label : a.labels) {
    if (label < 0 || label >= a.k) throw InvalidArgument("label out of range [0, k)");
  }
}

std::vector<std::size_t> cluster_census(const ClusterAssignment& a) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(a.k), 0);
  for (int label : a.labels) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

}  // namespace klish
