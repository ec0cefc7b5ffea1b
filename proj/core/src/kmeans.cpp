#include "klish/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "klish/error.hpp"
#include "klish/parallel.hpp"
#include "klish/rng.hpp"

namespace klish {

namespace {

struct Nearest {
  std::vector<int> labels;
  std::vector<double> dist;  // squared distance to the assigned centroid
};

Nearest assign(const Matrix& x, const Matrix& c, int threads) {
  const auto n = static_cast<std::size_t>(x.rows());
  Nearest out{std::vector<int>(n), std::vector<double>(n)};
  for_each_chunk(n, kRowChunk, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = x.row(static_cast<Eigen::Index>(i));
      int best = 0;
      double best_d = (row - c.row(0)).squaredNorm();
      for (Eigen::Index k = 1; k < c.rows(); ++k) {
        const double dk = (row - c.row(k)).squaredNorm();
        if (dk < best_d) {
          best_d = dk;
          best = static_cast<int>(k);
        }
      }
      out.labels[i] = best;
      out.dist[i] = best_d;
    }
  });
  return out;
}

// Ordered reduction of per-chunk sums, so the result does not depend on threads.
Matrix cluster_means(const Matrix& x, const std::vector<int>& labels, const Matrix& previous, int threads) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index k = previous.rows();
  const std::size_t chunks = chunk_count(n, kRowChunk);
  std::vector<Matrix> sums(chunks);
  std::vector<std::vector<std::size_t>> counts(chunks);
  for_each_chunk(n, kRowChunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    sums[c] = Matrix::Zero(k, x.cols());
    counts[c].assign(static_cast<std::size_t>(k), 0);
    for (std::size_t i = begin; i < end; ++i) {
      sums[c].row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[c][static_cast<std::size_t>(labels[i])];
    }
  });
  Matrix total = Matrix::Zero(k, x.cols());
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sums[c];
    for (Eigen::Index j = 0; j < k; ++j) count[static_cast<std::size_t>(j)] += counts[c][static_cast<std::size_t>(j)];
  }
  Matrix means = previous;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (count[static_cast<std::size_t>(j)] > 0) means.row(j) = total.row(j) / static_cast<double>(count[static_cast<std::size_t>(j)]);
  }
  return means;
}

double sum_ordered(const std::vector<double>& v) {
  // Chunked so the value matches regardless of how distances were produced.
  double total = 0.0;
  for (std::size_t begin = 0; begin < v.size(); begin += kRowChunk) {
    double part = 0.0;
    const std::size_t end = std::min(v.size(), begin + kRowChunk);
    for (std::size_t i = begin; i < end; ++i) part += v[i];
    total += part;
  }
  return total;
}

// Moves every empty centroid onto the farthest sample of a cluster that can spare one.
bool repair_empty(const Matrix& x, Matrix& c, Nearest& near) {
  const Eigen::Index k = c.rows();
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (int l : near.labels) ++count[static_cast<std::size_t>(l)];
  bool repaired = false;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (count[static_cast<std::size_t>(j)] > 0) continue;
    std::size_t far = near.labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < near.labels.size(); ++i) {
      if (count[static_cast<std::size_t>(near.labels[i])] > 1 && near.dist[i] > far_d) {
        far_d = near.dist[i];
        far = i;
      }
    }
    if (far == near.labels.size()) break;  // fewer samples than clusters
    --count[static_cast<std::size_t>(near.labels[far])];
    ++count[static_cast<std::size_t>(j)];
    near.labels[far] = static_cast<int>(j);
    near.dist[far] = 0.0;
    c.row(j) = x.row(static_cast<Eigen::Index>(far));
    repaired = true;
  }
  return repaired;
}

}  // namespace

std::vector<Eigen::Index> kmeanspp_seed_indices(const FeatureDataset& d, int k, std::uint64_t seed) {
  const Eigen::Index n = d.size();
  if (k < 1) throw InvalidArgument("k-means++ needs k >= 1");
  if (k > n) throw InvalidArgument("k-means++: k > N");
  Rng rng(seed);
  std::vector<Eigen::Index> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  chosen.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  taken[static_cast<std::size_t>(chosen.back())] = 1;

  std::vector<double> nearest(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    nearest[static_cast<std::size_t>(i)] = (d.data.row(i) - d.data.row(chosen.back())).squaredNorm();

  while (static_cast<int>(chosen.size()) < k) {
    const double total = sum_ordered(nearest);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = nearest[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        acc += w;
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every remaining row duplicates a chosen one: fall back to uniform over the rest.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)]) free.push_back(i);
      pick = free[rng.below(free.size())];
    }
    chosen.push_back(pick);
    taken[static_cast<std::size_t>(pick)] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dist = (d.data.row(i) - d.data.row(pick)).squaredNorm();
      auto& slot = nearest[static_cast<std::size_t>(i)];
      slot = std::min(slot, dist);
    }
  }
  return chosen;
}

Matrix kmeanspp_seed(const FeatureDataset& d, int k, std::uint64_t seed) {
  const auto idx = kmeanspp_seed_indices(d, k, seed);
  Matrix c(k, d.dim());
  for (int j = 0; j < k; ++j) c.row(j) = d.data.row(idx[static_cast<std::size_t>(j)]);
  return c;
}

KMeansResult lloyd(const FeatureDataset& d, Matrix init, const KMeansOptions& opts) {
  if (init.rows() < 1) throw InvalidArgument("lloyd: need at least one centroid");
  if (init.cols() != d.dim()) throw InvalidArgument("lloyd: centroid dimension mismatch");
  KMeansResult out;
  out.centroids = std::move(init);
  Nearest near = assign(d.data, out.centroids, opts.threads);
  out.wcss_trace.push_back(sum_ordered(near.dist));

  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;
    if (repair_empty(d.data, out.centroids, near)) out.repaired_at.push_back(it);
    Matrix next = cluster_means(d.data, near.labels, out.centroids, opts.threads);
    const double shift = (next - out.centroids).cwiseAbs().maxCoeff();
    out.centroids = std::move(next);
    near = assign(d.data, out.centroids, opts.threads);
    out.wcss_trace.push_back(sum_ordered(near.dist));

    std::vector<char> occupied(static_cast<std::size_t>(out.centroids.rows()), 0);
    for (int l : near.labels) occupied[static_cast<std::size_t>(l)] = 1;
    const bool any_empty = std::find(occupied.begin(), occupied.end(), 0) != occupied.end() &&
                           static_cast<Eigen::Index>(near.labels.size()) >= out.centroids.rows();
    if (shift < opts.tol && !any_empty) {
      out.converged = true;
      break;
    }
  }
  out.assignment = ClusterAssignment{std::move(near.labels), static_cast<int>(out.centroids.rows())};
  return out;
}

KMeansResult kmeans_restart_with(const FeatureDataset& d, const Matrix& kept, const KMeansOptions& opts) {
  if (kept.rows() == 0) throw InvalidArgument("kmeans_restart_with: no centroids kept");
  return lloyd(d, kept, opts);
}

ClusterAssignment kmeans_predict(const Matrix& x, const Matrix& centroids, int threads) {
  if (centroids.rows() < 1) throw InvalidArgument("kmeans_predict: no centroids");
  if (x.rows() > 0 && x.cols() != centroids.cols()) throw InvalidArgument("kmeans_predict: dimension mismatch");
  auto near = assign(x, centroids, threads);
  return ClusterAssignment{std::move(near.labels), static_cast<int>(centroids.rows())};
}

double wcss(const Matrix& x, const Matrix& centroids, const ClusterAssignment& a) {
  std::vector<double> dist(a.labels.size());
  for (std::size_t i = 0; i < a.labels.size(); ++i)
    dist[i] = (x.row(static_cast<Eigen::Index>(i)) - centroids.row(a.labels[i])).squaredNorm();
  return sum_ordered(dist);
}

KMeansResult kmeans(const FeatureDataset& d, int k, std::uint64_t seed, const KMeansOptions& opts) {
  return lloyd(d, kmeanspp_seed(d, k, seed), opts);
}

}  // namespace klish
