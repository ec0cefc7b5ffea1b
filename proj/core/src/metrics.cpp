#include "klish/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "klish/error.hpp"

namespace klish::metrics {

namespace {

double comb2(std::int64_t x) { return x < 2 ? 0.0 : static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; }

void check_match(const MatchVector& a, const ContingencyTable& t) {
  if (static_cast<int>(a.size()) != t.rows) throw InvalidArgument("match vector length != cluster count");
  for (int v : a)
    if (v < 0 || v > t.cols) throw InvalidArgument("match vector value out of range");
}

// Per-class intersection and union sizes under `a`.
void class_overlap(const MatchVector& a, const ContingencyTable& t, std::vector<std::int64_t>& inter,
                   std::vector<std::int64_t>& matched) {
  inter.assign(static_cast<std::size_t>(t.cols), 0);
  matched.assign(static_cast<std::size_t>(t.cols), 0);
  for (int k = 0; k < t.rows; ++k) {
    const int m = a[static_cast<std::size_t>(k)];
    if (m == 0) continue;
    inter[static_cast<std::size_t>(m - 1)] += t.at(k, m - 1);
    matched[static_cast<std::size_t>(m - 1)] += t.row_sums[static_cast<std::size_t>(k)];
  }
}

double class_iou(std::int64_t inter, std::int64_t matched, std::int64_t class_size) {
  const std::int64_t uni = class_size + matched - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

ContingencyTable contingency(const ClusterAssignment& pred, const ClusterAssignment& gt) {
  if (pred.labels.size() != gt.labels.size()) throw InvalidArgument("contingency: label vectors differ in length");
  require_valid(pred);
  require_valid(gt);
  ContingencyTable t;
  t.rows = pred.k;
  t.cols = gt.k;
  t.counts.assign(static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols), 0);
  t.row_sums.assign(static_cast<std::size_t>(t.rows), 0);
  t.col_sums.assign(static_cast<std::size_t>(t.cols), 0);
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const int k = pred.labels[i];
    const int m = gt.labels[i];
    ++t.counts[static_cast<std::size_t>(k) * static_cast<std::size_t>(t.cols) + static_cast<std::size_t>(m)];
    ++t.row_sums[static_cast<std::size_t>(k)];
    ++t.col_sums[static_cast<std::size_t>(m)];
  }
  t.n = static_cast<std::int64_t>(pred.labels.size());
  return t;
}

double ari(const ContingencyTable& t) {
  double index = 0.0;
  for (auto c : t.counts) index += comb2(c);
  double sum_a = 0.0, sum_b = 0.0;
  for (auto a : t.row_sums) sum_a += comb2(a);
  for (auto b : t.col_sums) sum_b += comb2(b);
  const double total = comb2(t.n);
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double entropy(const std::vector<std::int64_t>& marginals, std::int64_t n) {
  double h = 0.0;
  for (auto c : marginals) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const ContingencyTable& t) {
  const double n = static_cast<double>(t.n);
  double mi = 0.0;
  for (int k = 0; k < t.rows; ++k) {
    for (int m = 0; m < t.cols; ++m) {
      const auto c = t.at(k, m);
      if (c == 0) continue;
      const double nij = static_cast<double>(c);
      mi += nij / n *
            std::log(n * nij /
                     (static_cast<double>(t.row_sums[static_cast<std::size_t>(k)]) * static_cast<double>(t.col_sums[static_cast<std::size_t>(m)])));
    }
  }
  return std::max(mi, 0.0);
}

double expected_mutual_information(const ContingencyTable& t) {
  const std::int64_t n = t.n;
  const double nd = static_cast<double>(n);
  const double lg_n = std::lgamma(nd + 1.0);
  double emi = 0.0;
  for (auto a : t.row_sums) {
    if (a == 0) continue;
    for (auto b : t.col_sums) {
      if (b == 0) continue;
      const double ad = static_cast<double>(a), bd = static_cast<double>(b);
      // log of a! b! (n-a)! (n-b)! / n!
      const double fixed = std::lgamma(ad + 1) + std::lgamma(bd + 1) + std::lgamma(nd - ad + 1) +
                           std::lgamma(nd - bd + 1) - lg_n;
      const std::int64_t lo = std::max<std::int64_t>(1, a + b - n);
      const std::int64_t hi = std::min(a, b);
      for (std::int64_t nij = lo; nij <= hi; ++nij) {
        const double x = static_cast<double>(nij);
        const double log_p = fixed - std::lgamma(x + 1) - std::lgamma(ad - x + 1) - std::lgamma(bd - x + 1) -
                             std::lgamma(nd - ad - bd + x + 1);
        emi += x / nd * std::log(nd * x / (ad * bd)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

double ami(const ContingencyTable& t) {
  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t);
  const double h = 0.5 * (entropy(t.row_sums, t.n) + entropy(t.col_sums, t.n));
  const double denom = h - emi;
  const double scale = std::max({1.0, std::fabs(h), std::fabs(emi)});
  if (std::fabs(denom) <= 1e-12 * scale) {
    return std::fabs(mi - emi) <= 1e-12 * scale ? 1.0 : 0.0;
  }
  return (mi - emi) / denom;
}

double j_objective(const MatchVector& a, const ContingencyTable& t) {
  check_match(a, t);
  std::vector<std::int64_t> inter, matched;
  class_overlap(a, t, inter, matched);
  double j = 0.0;
  for (int m = 0; m < t.cols; ++m)
    j += class_iou(inter[static_cast<std::size_t>(m)], matched[static_cast<std::size_t>(m)], t.col_sums[static_cast<std::size_t>(m)]);
  return j;
}

std::vector<double> per_class_iou(const MatchVector& a, const ContingencyTable& t) {
  check_match(a, t);
  std::vector<std::int64_t> inter, matched;
  class_overlap(a, t, inter, matched);
  std::vector<double> out(static_cast<std::size_t>(t.cols));
  for (int m = 0; m < t.cols; ++m)
    out[static_cast<std::size_t>(m)] =
        class_iou(inter[static_cast<std::size_t>(m)], matched[static_cast<std::size_t>(m)], t.col_sums[static_cast<std::size_t>(m)]);
  return out;
}

MiouResult miou_greedy(const ContingencyTable& t) {
  if (t.rows < 1 || t.cols < 1) throw InvalidArgument("miou: need K >= 1 and M >= 1");
  MiouResult out;
  out.match.assign(static_cast<std::size_t>(t.rows), 0);
  std::vector<std::int64_t> inter(static_cast<std::size_t>(t.cols), 0), matched(static_cast<std::size_t>(t.cols), 0);
  auto iou_of = [&](int m, std::int64_t extra_inter, std::int64_t extra_size) {
    const auto mi = static_cast<std::size_t>(m);
    return class_iou(inter[mi] + extra_inter, matched[mi] + extra_size, t.col_sums[mi]);
  };

  for (int step = 0; step < t.rows; ++step) {
    int best_k = -1, best_m = -1;
    double best_gain = 0.0;
    for (int k = 0; k < t.rows; ++k) {
      if (out.match[static_cast<std::size_t>(k)] != 0) continue;
      for (int m = 0; m < t.cols; ++m) {
        // Only class m's term changes, so comparing gains ranks the candidates by J.
        const double gain = iou_of(m, t.at(k, m), t.row_sums[static_cast<std::size_t>(k)]) - iou_of(m, 0, 0);
        if (best_k < 0 || gain > best_gain) {
          best_gain = gain;
          best_k = k;
          best_m = m;
        }
      }
    }
    out.match[static_cast<std::size_t>(best_k)] = best_m + 1;
    inter[static_cast<std::size_t>(best_m)] += t.at(best_k, best_m);
    matched[static_cast<std::size_t>(best_m)] += t.row_sums[static_cast<std::size_t>(best_k)];
    out.j_trace.push_back(j_objective(out.match, t));
  }
  out.miou = out.j_trace.back() / t.cols;
  return out;
}

MiouResult miou_greedy(const ClusterAssignment& gt, const ClusterAssignment& pred) {
  return miou_greedy(contingency(pred, gt));
}

MiouResult miou_exhaustive(const ContingencyTable& t, std::uint64_t max_space) {
  if (t.rows < 1 || t.cols < 1) throw InvalidArgument("miou: need K >= 1 and M >= 1");
  std::uint64_t space = 1;
  for (int k = 0; k < t.rows; ++k) {
    space *= static_cast<std::uint64_t>(t.cols + 1);
    if (space > max_space) throw InvalidArgument("miou_exhaustive: search space (M+1)^K too large");
  }
  MatchVector a(static_cast<std::size_t>(t.rows), 0);
  MiouResult out;
  double best = -1.0;
  for (std::uint64_t code = 0; code < space; ++code) {
    // a[0] is the most significant digit, so codes enumerate a lexicographically.
    std::uint64_t rest = code;
    for (int k = t.rows - 1; k >= 0; --k) {
      a[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::uint64_t>(t.cols + 1));
      rest /= static_cast<std::uint64_t>(t.cols + 1);
    }
    const double j = j_objective(a, t);
    if (j > best) {
      best = j;
      out.match = a;
    }
  }
  out.miou = best / t.cols;
  return out;
}

MiouResult miou_exhaustive(const ClusterAssignment& gt, const ClusterAssignment& pred, std::uint64_t max_space) {
  return miou_exhaustive(contingency(pred, gt), max_space);
}

}  // namespace klish::metrics
