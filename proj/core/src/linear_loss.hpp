#pragma once

// Shared chunked evaluation of per-sample linear losses. Not installed.

#include <functional>

#include "klish/lbfgs.hpp"
#include "klish/svm.hpp"

namespace klish::detail {

/// Given scores F (rows x K) and labels for those rows, returns the summed
/// loss and writes dLoss/dF into `dscores` (same shape as F).
using RowLoss = std::function<double(const Matrix& scores, const int* labels, Matrix& dscores)>;

struct LossValue {
  double value = 0.0;
  Matrix grad_w;
  Vector grad_b;
};

/// lambda1 / (K N) * sum_i rowloss + ||W||^2 / (2K), with gradient if requested.
LossValue evaluate_linear_loss(const LinearClassifier& c, const Matrix& x, const std::vector<int>& labels,
                               double lambda1, int threads, bool with_gradient, const RowLoss& row_loss);

std::pair<LinearClassifier, TrainDiagnostics> train_linear(const LinearClassifier& init, const FeatureDataset& d,
                                                           const ClusterAssignment& a, const TrainOptions& opts,
                                                           const RowLoss& row_loss);

}  // namespace klish::detail
