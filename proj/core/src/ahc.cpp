#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "klish/baselines.hpp"
#include "klish/error.hpp"
#include "klish/parallel.hpp"
#include "klish/softmax.hpp"

namespace klish {

Linkage parse_linkage(std::string_view name) {
  if (name == "ward") return Linkage::kWardEuclidean;
  if (name == "arccos") return Linkage::kAverageArccos;
  throw InvalidArgument("unknown linkage '" + std::string(name) + "' (expected ward or arccos)");
}

std::string_view linkage_name(Linkage l) { return l == Linkage::kWardEuclidean ? "ward" : "arccos"; }

namespace {

// Upper-triangular condensed storage, i < j.
class Condensed {
 public:
  explicit Condensed(std::size_t n) : n_(n), values_(n < 2 ? 0 : n * (n - 1) / 2) {}

  double& operator()(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return values_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

void fill_distances(Condensed& dist, const FeatureDataset& d, Linkage linkage, int threads) {
  const auto n = static_cast<std::size_t>(d.size());
  Matrix x = d.data;
  if (linkage == Linkage::kAverageArccos) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double norm = x.row(i).norm();
      if (norm == 0.0) throw InvalidArgument("arccos linkage: sample " + std::to_string(i) + " is a zero vector");
      x.row(i) /= norm;
    }
  }
  // Rows are independent, and each pair is written by exactly one row.
  for_each_chunk(n, 64, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ri = x.row(static_cast<Eigen::Index>(i));
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto rj = x.row(static_cast<Eigen::Index>(j));
        double v;
        if (linkage == Linkage::kWardEuclidean) {
          v = (ri - rj).squaredNorm();
        } else {
          v = std::acos(std::clamp(ri.dot(rj), -1.0, 1.0));
        }
        dist(i, j) = v;
      }
    }
  });
}

}  // namespace

std::vector<AhcMerge> ahc_tree(const FeatureDataset& d, Linkage linkage, const AhcOptions& opts) {
  const auto n = static_cast<std::size_t>(d.size());
  if (n == 0) throw InvalidArgument("ahc: empty dataset");
  if (n > opts.max_samples)
    throw InvalidArgument("ahc: N=" + std::to_string(n) + " exceeds the cap of " + std::to_string(opts.max_samples));
  require_valid(d);

  Condensed dist(n);
  fill_distances(dist, d, linkage, resolve_threads(opts.threads));

  std::vector<char> active(n, 1);
  std::vector<double> size(n, 1.0);
  std::vector<std::size_t> chain;
  std::vector<AhcMerge> merges;
  merges.reserve(n - 1);

  // Nearest-neighbor chain; valid because both linkages are reducible.
  while (merges.size() + 1 < n) {
    if (chain.empty()) {
      std::size_t first = 0;
      while (!active[first]) ++first;
      chain.push_back(first);
    }
    std::size_t x = 0, y = 0;
    double dxy = 0.0;
    for (;;) {
      x = chain.back();
      const bool has_prev = chain.size() >= 2;
      std::size_t best = has_prev ? chain[chain.size() - 2] : n;
      double best_d = has_prev ? dist(x, best) : std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (!active[j] || j == x) continue;
        const double v = dist(x, j);
        if (v < best_d) {
          best_d = v;
          best = j;
        }
      }
      if (has_prev && best == chain[chain.size() - 2]) {
        y = best;
        dxy = best_d;
        break;
      }
      chain.push_back(best);
    }
    chain.pop_back();
    chain.pop_back();

    const std::size_t keep = std::min(x, y), gone = std::max(x, y);
    const double nk = size[keep], ng = size[gone];
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == keep || j == gone) continue;
      const double dk = dist(keep, j), dg = dist(gone, j);
      double v;
      if (linkage == Linkage::kWardEuclidean) {
        const double nj = size[j];
        v = ((nk + nj) * dk + (ng + nj) * dg - nj * dxy) / (nk + ng + nj);
      } else {
        v = (nk * dk + ng * dg) / (nk + ng);
      }
      dist(keep, j) = v;
    }
    active[gone] = 0;
    size[keep] = nk + ng;
    merges.push_back({static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(gone), dxy});
  }

  // A child never sits above its parent, so a stable sort keeps the tree valid.
  std::stable_sort(merges.begin(), merges.end(),
                   [](const AhcMerge& l, const AhcMerge& r) { return l.height < r.height; });
  return merges;
}

ClusterAssignment cut_tree(const std::vector<AhcMerge>& merges, std::size_t n, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw InvalidArgument("ahc: k=" + std::to_string(k) + " must be in [1, N]");
  if (merges.size() + 1 != n) throw InvalidArgument("ahc: merge list does not match N");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (std::size_t s = 0; s + static_cast<std::size_t>(k) < n; ++s) {
    const auto ra = find(static_cast<std::size_t>(merges[s].a));
    const auto rb = find(static_cast<std::size_t>(merges[s].b));
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  ClusterAssignment out;
  out.labels.assign(n, -1);
  std::vector<int> label_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (label_of_root[r] < 0) label_of_root[r] = out.k++;
    out.labels[i] = label_of_root[r];
  }
  return out;
}

ClusterAssignment ahc(const FeatureDataset& d, int k, Linkage linkage, const AhcOptions& opts) {
  if (k < 1 || k > d.size()) throw InvalidArgument("ahc: k=" + std::to_string(k) + " must be in [1, N]");
  return cut_tree(ahc_tree(d, linkage, opts), static_cast<std::size_t>(d.size()), k);
}

LinearClassifier ahc_predictor(const FeatureDataset& train, const ClusterAssignment& a, const TrainOptions& opts) {
  if (a.k == 1) {
    // Nothing to separate: the single score is constant.
    if (a.size() != static_cast<std::size_t>(train.size())) throw InvalidArgument("ahc_predictor: N mismatch");
    return LinearClassifier::zeros(1, train.dim());
  }
  return train_softmax(LinearClassifier::zeros(a.k, train.dim()), train, a, opts).first;
}

}  // namespace klish
