#include "klish/softmax.hpp"

#include <cmath>

#include "linear_loss.hpp"

namespace klish {

namespace {

double cross_entropy_rows(const Matrix& scores, const int* labels, Matrix& dscores) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
      dscores(i, k) = std::exp(scores(i, k) - top);
      z += dscores(i, k);
    }
    dscores.row(i) /= z;
    const int y = labels[i];
    loss += top + std::log(z) - scores(i, y);
    dscores(i, y) -= 1.0;
  }
  return loss;
}

}  // namespace

double softmax_objective(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                         double lambda1, int threads) {
  check_shapes(c, d, a);
  return detail::evaluate_linear_loss(c, d.data, a.labels, lambda1, threads, false, cross_entropy_rows).value;
}

ClassifierGradient softmax_gradient(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                                    double lambda1, int threads) {
  check_shapes(c, d, a);
  auto v = detail::evaluate_linear_loss(c, d.data, a.labels, lambda1, threads, true, cross_entropy_rows);
  return {std::move(v.grad_w), std::move(v.grad_b)};
}

std::pair<LinearClassifier, TrainDiagnostics> train_softmax(const LinearClassifier& init, const FeatureDataset& d,
                                                            const ClusterAssignment& a, const TrainOptions& opts) {
  return detail::train_linear(init, d, a, opts, cross_entropy_rows);
}

}  // namespace klish
