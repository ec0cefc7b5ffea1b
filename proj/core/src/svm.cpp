#include "klish/svm.hpp"

#include <algorithm>
#include <cmath>

#include "klish/error.hpp"
#include "klish/lbfgs.hpp"
#include "klish/parallel.hpp"
#include "linear_loss.hpp"

namespace klish {

namespace detail {

LossValue evaluate_linear_loss(const LinearClassifier& c, const Matrix& x, const std::vector<int>& labels,
                               double lambda1, int threads, bool with_gradient, const RowLoss& row_loss) {
  const auto n = static_cast<std::size_t>(x.rows());
  const int k = c.clusters();
  const std::size_t chunks = chunk_count(n, kRowChunk);
  std::vector<double> partial_loss(chunks, 0.0);
  std::vector<Matrix> partial_w(with_gradient ? chunks : 0);
  std::vector<Vector> partial_b(with_gradient ? chunks : 0);

  for_each_chunk(n, kRowChunk, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    const auto rows = static_cast<Eigen::Index>(end - begin);
    const auto block = x.middleRows(static_cast<Eigen::Index>(begin), rows);
    Matrix scores = block * c.weights.transpose();
    scores.rowwise() += c.biases.transpose();
    Matrix dscores(rows, k);
    partial_loss[ci] = row_loss(scores, labels.data() + begin, dscores);
    if (with_gradient) {
      partial_w[ci].noalias() = dscores.transpose() * block;
      partial_b[ci] = dscores.colwise().sum().transpose();
    }
  });

  const double scale = lambda1 / (static_cast<double>(k) * static_cast<double>(n));
  LossValue out;
  double data = 0.0;
  for (double v : partial_loss) data += v;
  out.value = scale * data + c.weights.squaredNorm() / (2.0 * k);
  if (with_gradient) {
    out.grad_w = Matrix::Zero(k, x.cols());
    out.grad_b = Vector::Zero(k);
    for (std::size_t ci = 0; ci < chunks; ++ci) {
      out.grad_w += partial_w[ci];
      out.grad_b += partial_b[ci];
    }
    out.grad_w *= scale;
    out.grad_b *= scale;
    out.grad_w += c.weights / static_cast<double>(k);
  }
  return out;
}

std::pair<LinearClassifier, TrainDiagnostics> train_linear(const LinearClassifier& init, const FeatureDataset& d,
                                                           const ClusterAssignment& a, const TrainOptions& opts,
                                                           const RowLoss& row_loss) {
  check_shapes(init, d, a);
  const int k = init.clusters();
  const Eigen::Index dim = init.dim();
  Objective f = [&](const Vector& theta, Vector& grad) {
    const LinearClassifier c = unpack(theta, k, dim);
    const auto v = evaluate_linear_loss(c, d.data, a.labels, opts.lambda1, opts.threads, true, row_loss);
    grad.head(k * dim) = Eigen::Map<const Vector>(v.grad_w.data(), k * dim);
    grad.tail(k) = v.grad_b;
    return v.value;
  };
  LbfgsOptions lopts;
  lopts.max_iter = opts.max_iter;
  lopts.step_tol = opts.tol;
  const auto result = minimize_lbfgs(f, pack(init), lopts);
  TrainDiagnostics diag{result.value, result.iterations, result.last_step, result.converged};
  return {unpack(result.x, k, dim), diag};
}

}  // namespace detail

namespace {

double squared_hinge_rows(const Matrix& scores, const int* labels, Matrix& dscores) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const int y = labels[i];
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
      const double sign = (k == y) ? 1.0 : -1.0;
      const double h = std::max(0.0, 1.0 - sign * scores(i, k));
      loss += h * h;
      dscores(i, k) = -2.0 * sign * h;
    }
  }
  return loss;
}

}  // namespace

void check_shapes(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a) {
  if (c.weights.rows() != c.biases.size()) throw InvalidArgument("classifier weight rows != bias count");
  if (c.clusters() < 1) throw InvalidArgument("classifier has no rows");
  if (c.clusters() != a.k) throw InvalidArgument("classifier rows != assignment k");
  if (c.dim() != d.dim()) throw InvalidArgument("classifier dimension != feature dimension");
  if (static_cast<Eigen::Index>(a.labels.size()) != d.size()) throw InvalidArgument("label count != sample count");
  if (d.size() < 1) throw InvalidArgument("empty dataset");
  require_valid(a);
}

Vector pack(const LinearClassifier& c) {
  const Eigen::Index kd = c.weights.size();
  Vector theta(kd + c.biases.size());
  theta.head(kd) = Eigen::Map<const Vector>(c.weights.data(), kd);
  theta.tail(c.biases.size()) = c.biases;
  return theta;
}

LinearClassifier unpack(const Vector& theta, int k, Eigen::Index dim) {
  LinearClassifier c;
  c.weights = Eigen::Map<const Matrix>(theta.data(), k, dim);
  c.biases = theta.tail(k);
  return c;
}

double svm_objective(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a, double lambda1,
                     int threads) {
  check_shapes(c, d, a);
  return detail::evaluate_linear_loss(c, d.data, a.labels, lambda1, threads, false, squared_hinge_rows).value;
}

ClassifierGradient svm_gradient(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                                double lambda1, int threads) {
  check_shapes(c, d, a);
  auto v = detail::evaluate_linear_loss(c, d.data, a.labels, lambda1, threads, true, squared_hinge_rows);
  return {std::move(v.grad_w), std::move(v.grad_b)};
}

std::pair<LinearClassifier, TrainDiagnostics> train_svm(const LinearClassifier& init, const FeatureDataset& d,
                                                        const ClusterAssignment& a, const TrainOptions& opts) {
  return detail::train_linear(init, d, a, opts, squared_hinge_rows);
}

Matrix decision_scores(const LinearClassifier& c, const Matrix& x, int threads) {
  if (x.cols() != c.dim()) throw InvalidArgument("decision_scores: dimension mismatch");
  Matrix scores(x.rows(), c.clusters());
  for_each_chunk(static_cast<std::size_t>(x.rows()), kRowChunk, threads,
                 [&](std::size_t, std::size_t begin, std::size_t end) {
                   const auto rows = static_cast<Eigen::Index>(end - begin);
                   auto out = scores.middleRows(static_cast<Eigen::Index>(begin), rows);
                   out.noalias() = x.middleRows(static_cast<Eigen::Index>(begin), rows) * c.weights.transpose();
                   out.rowwise() += c.biases.transpose();
                 });
  return scores;
}

Matrix confidence_from_scores(const Matrix& scores) {
  return ((scores.array() + 1.0) * 0.5).min(1.0).max(0.0).matrix();
}

Matrix confidence_matrix(const LinearClassifier& c, const FeatureDataset& d, int threads) {
  return confidence_from_scores(decision_scores(c, d.data, threads));
}

std::vector<double> iou_from_scores(const Matrix& scores, const ClusterAssignment& a) {
  if (static_cast<Eigen::Index>(a.labels.size()) != scores.rows() || scores.cols() != a.k)
    throw InvalidArgument("iou: scores and assignment disagree");
  const auto k = static_cast<std::size_t>(a.k);
  std::vector<std::size_t> inter(k, 0), uni(k, 0);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const int y = a.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const bool predicted = scores(i, j) > 0.0;
      const bool member = (j == y);
      if (predicted && member) ++inter[static_cast<std::size_t>(j)];
      if (predicted || member) ++uni[static_cast<std::size_t>(j)];
    }
  }
  std::vector<double> out(k, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    out[j] = uni[j] == 0 ? 0.0 : static_cast<double>(inter[j]) / static_cast<double>(uni[j]);
  return out;
}

std::vector<double> iou_per_cluster(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                                    int threads) {
  check_shapes(c, d, a);
  return iou_from_scores(decision_scores(c, d.data, threads), a);
}

double ecos(const Matrix& confidence, int i, int j) {
  if (i < 0 || j < 0 || i >= confidence.cols() || j >= confidence.cols()) throw InvalidArgument("ecos: index out of range");
  const auto a = confidence.col(i);
  const auto b = confidence.col(j);
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

std::vector<double> ecos_row(const Matrix& confidence, int i) {
  std::vector<double> out(static_cast<std::size_t>(confidence.cols()));
  for (Eigen::Index j = 0; j < confidence.cols(); ++j) out[static_cast<std::size_t>(j)] = ecos(confidence, i, static_cast<int>(j));
  return out;
}

}  // namespace klish
