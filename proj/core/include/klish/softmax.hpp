#pragma once

#include <utility>

#include "klish/svm.hpp"

namespace klish {

// Softmax (cross-entropy) linear classifier with the same architecture and
// the same scaling as the SVM:
//
//   L = lambda1 / (K N) * sum_i -log softmax(W x_i + b)_{y_i} + ||W||_F^2 / (2K)

double softmax_objective(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                         double lambda1, int threads = 1);
ClassifierGradient softmax_gradient(const LinearClassifier& c, const FeatureDataset& d, const ClusterAssignment& a,
                                    double lambda1, int threads = 1);

std::pair<LinearClassifier, TrainDiagnostics> train_softmax(const LinearClassifier& init, const FeatureDataset& d,
                                                            const ClusterAssignment& a, const TrainOptions& opts);

}  // namespace klish
