#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <variant>

#include "klish/kmeans.hpp"
#include "klish/svm.hpp"
#include "klish/types.hpp"

namespace klish {

/// Clamp applied before the logit so that IoU 0 and 1 stay finite.
inline constexpr double kLogitEpsilon = 1e-6;

/// ln(m / (1 - m)) of m clamped to [eps, 1 - eps].
double inverse_sigmoid(double m);

struct FilterResult {
  Matrix centroids;
  ClusterAssignment assignment;
  FilterReport report;
  /// SVM trained from zeros on a0 (absent when k0 = 1).
  std::optional<std::pair<LinearClassifier, TrainDiagnostics>> svm;
};

/// Trains an SVM on the initial K-means clusters, drops every cluster whose
/// IoU logit is not above mean - std, and re-runs Lloyd from the survivors.
FilterResult filter_initial(const FeatureDataset& d, const Matrix& centroids0, const ClusterAssignment& a0,
                            const RunConfig& cfg);

/// Called after each merge step with the record just appended.
using MergeObserver = std::function<void(const MergeRecord&, const TrainDiagnostics&)>;

/// K-means at k0, filtering, then repeated SVM training and merging of the
/// least separable cluster into its most confused partner, down to 2 clusters
/// (or until stop_iou is reached).
MergeHistory klish_run(const FeatureDataset& d, const RunConfig& cfg, const MergeObserver& observer = {});

struct SelectByCount {
  int k = 0;
};
struct SelectByIou {
  double threshold = 0.0;
};
using SelectCriterion = std::variant<SelectByCount, SelectByIou>;

/// Record whose cluster_count matches, or the first whose min IoU reaches the threshold.
const MergeRecord& find_record(const MergeHistory& h, const SelectCriterion& criterion);

struct Selection {
  LinearClassifier classifier;
  ClusterAssignment assignment;  // argmax of the classifier scores
  int step = 0;
};

Selection select_model(const MergeHistory& h, const Matrix& x, const SelectCriterion& criterion);

}  // namespace klish
