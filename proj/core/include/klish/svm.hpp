#pragma once

#include <utility>
#include <vector>

#include "klish/types.hpp"

namespace klish {

/// Options shared by the SVM and softmax trainers.
struct TrainOptions {
  double lambda1 = 5000.0;
  double tol = 1e-4;  // L-inf change of (W, b) between accepted iterates
  int max_iter = 1000;
  int threads = 0;

  static TrainOptions from(const RunConfig& cfg) { return {cfg.lambda1, cfg.svm_tol, cfg.svm_max_iter, cfg.threads}; }
};

struct TrainDiagnostics {
  double objective = 0.0;
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
};

struct ClassifierGradient {
  Matrix weights;
  Vector biases;
};

// One-vs-rest squared-hinge SVM over K clusters (|A| = N samples):
//
//   L = lambda1 / (K N) * sum_i [ (1 - f_{i,y_i})_+^2 + sum_{k != y_i} (1 + f_{ik})_+^2 ]
//       + ||W||_F^2 / (2K),            f_{ik} = W_k x_i + b_k
//
// The bias is not regularized.

double svm_objective(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a, double lambda1,
                     int threads = 1);

ClassifierGradient svm_gradient(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                                double lambda1, int threads = 1);

/// L-BFGS on L, warm-started from `init`. Throws NumericError on divergence.
std::pair<LinearClassifier, TrainDiagnostics> train_svm(const LinearClassifier& init, const FeatureDataset& d,
                                                        const ClusterAssignment& a, const TrainOptions& opts);

/// Raw scores W x + b, N x K.
Matrix decision_scores(const LinearClassifier& c, const Matrix& x, int threads = 1);

/// clamp((s + 1) / 2, 0, 1) per sample and cluster, N x K.
Matrix confidence_matrix(const LinearClassifier& c, const FeatureDataset& d, int threads = 1);
Matrix confidence_from_scores(const Matrix& scores);

/// IoU_k = |S_k ∩ Y_k| / |S_k ∪ Y_k| with S_k = {i : score_ik > 0}; 0 when the union is empty.
std::vector<double> iou_per_cluster(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                                    int threads = 1);
std::vector<double> iou_from_scores(const Matrix& scores, const ClusterAssignment& a);

/// Cosine between confidence columns i and j; 0 if either column is all zero.
double ecos(const Matrix& confidence, int i, int j);
/// ecos(confidence, i, j) for every j.
std::vector<double> ecos_row(const Matrix& confidence, int i);

// Packing of (W, b) into the flat parameter vector used by the optimizer.
Vector pack(const LinearClassifier& c);
LinearClassifier unpack(const Vector& theta, int k, Eigen::Index dim);

/// Throws InvalidArgument unless c, d and a agree on K, D and N.
void check_shapes(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a);

}  // namespace klish
