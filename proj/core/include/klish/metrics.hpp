#pragma once

#include <cstdint>
#include <vector>

#include "klish/types.hpp"

namespace klish::metrics {

/// counts(k, m) = number of samples in predicted cluster k and class m.
struct ContingencyTable {
  int rows = 0;  // predicted clusters K
  int cols = 0;  // groundtruth classes M
  std::vector<std::int64_t> counts;  // row-major K x M
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t n = 0;

  std::int64_t at(int k, int m) const { return counts[static_cast<std::size_t>(k) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(m)]; }
};

ContingencyTable contingency(const ClusterAssignment& pred, const ClusterAssignment& gt);

/// Hubert-Arabie adjusted Rand index. 1.0 when the chance-corrected
/// denominator vanishes (both partitions trivial and identical).
double ari(const ContingencyTable& t);

/// Natural-log entropies and mutual information.
double entropy(const std::vector<std::int64_t>& marginals, std::int64_t n);
double mutual_information(const ContingencyTable& t);
/// E[MI] under the hypergeometric (permutation) model with fixed marginals.
double expected_mutual_information(const ContingencyTable& t);

/// (MI - E[MI]) / (mean(H(U), H(V)) - E[MI]); degenerate denominator gives
/// 1.0 if MI == E[MI] and 0.0 otherwise.
double ami(const ContingencyTable& t);

/// a[k] in {0..M}: cluster k is matched to class a[k] - 1, or unmatched if 0.
using MatchVector = std::vector<int>;

/// J(a) = sum_m IoU(Y_m, union of clusters with a[k] = m).
double j_objective(const MatchVector& a, const ContingencyTable& t);
/// IoU of each class under `a`, length M.
std::vector<double> per_class_iou(const MatchVector& a, const ContingencyTable& t);

struct MiouResult {
  double miou = 0.0;  // J(a) / M
  MatchVector match;
  std::vector<double> j_trace;  // J after each greedy step (greedy only)
};

/// Greedy many-to-one matching: K steps, each fixing the single (cluster,
/// class) pair that maximizes J; ties go to the smallest (k, m).
MiouResult miou_greedy(const ContingencyTable& t);
MiouResult miou_greedy(const ClusterAssignment& gt, const ClusterAssignment& pred);

/// Exact max of J over {0..M}^K. Throws InvalidArgument if (M+1)^K > max_space.
MiouResult miou_exhaustive(const ContingencyTable& t, std::uint64_t max_space = 1'000'000);
MiouResult miou_exhaustive(const ClusterAssignment& gt, const ClusterAssignment& pred,
                           std::uint64_t max_space = 1'000'000);

}  // namespace klish::metrics
