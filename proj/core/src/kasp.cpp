#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "klish/baselines.hpp"
#include "klish/error.hpp"

namespace klish {

namespace {

constexpr int kEmbedRestarts = 10;

}  // namespace

ClusterAssignment spectral_group(const Matrix& points, int k, std::uint64_t seed, double* sigma_out) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw InvalidArgument("spectral_group: k=" + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  if (n == 1) {
    if (sigma_out) *sigma_out = 0.0;
    return {{0}, 1};
  }

  Matrix dist2(n, n);
  std::vector<double> pair;
  pair.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).squaredNorm();
      dist2(i, j) = dist2(j, i) = v;
      pair.push_back(std::sqrt(v));
    }
  }
  std::sort(pair.begin(), pair.end());
  const std::size_t mid = pair.size() / 2;
  const double sigma = pair.size() % 2 ? pair[mid] : 0.5 * (pair[mid - 1] + pair[mid]);
  if (sigma_out) *sigma_out = sigma;
  if (!(sigma > 0.0)) throw NumericError("spectral_group: median pairwise distance is 0 (all points identical)");

  Eigen::MatrixXd affinity = (-dist2.array() / (2.0 * sigma * sigma)).exp().matrix();
  affinity.diagonal().setZero();
  Eigen::VectorXd inv_sqrt_deg = affinity.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt_deg(i) = inv_sqrt_deg(i) > 0.0 ? 1.0 / std::sqrt(inv_sqrt_deg(i)) : 0.0;
  Eigen::MatrixXd laplacian = -(inv_sqrt_deg.asDiagonal() * affinity * inv_sqrt_deg.asDiagonal());
  laplacian.diagonal().array() += 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) throw NumericError("spectral_group: eigen decomposition failed");

  // Eigenvalues come back ascending.
  Matrix embed = solver.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }

  FeatureDataset rows{embed, std::nullopt};
  KMeansOptions opts;
  opts.threads = 1;
  KMeansResult best;
  double best_wcss = 0.0;
  for (int r = 0; r < kEmbedRestarts; ++r) {
    auto res = kmeans(rows, k, seed + static_cast<std::uint64_t>(r), opts);
    const double w = wcss(embed, res.centroids, res.assignment);
    if (r == 0 || w < best_wcss) {
      best_wcss = w;
      best = std::move(res);
    }
  }
  return best.assignment;
}

KaspResult kasp(const FeatureDataset& d, int k, int k0, std::uint64_t seed, const KMeansOptions& opts) {
  if (k < 1) throw InvalidArgument("kasp: k must be >= 1");
  if (k > k0) throw InvalidArgument("kasp: k=" + std::to_string(k) + " > k0=" + std::to_string(k0));
  if (k0 > d.size()) throw InvalidArgument("kasp: k0=" + std::to_string(k0) + " > N=" + std::to_string(d.size()));

  auto km = kmeans(d, k0, seed, opts);
  KaspResult out;
  out.centroids = km.centroids;
  out.centroid_groups = spectral_group(km.centroids, k, seed ^ 0x9e3779b97f4a7c15ULL, &out.sigma);
  out.assignment.k = k;
  out.assignment.labels.resize(km.assignment.labels.size());
  for (std::size_t i = 0; i < km.assignment.labels.size(); ++i)
    out.assignment.labels[i] = out.centroid_groups.labels[static_cast<std::size_t>(km.assignment.labels[i])];
  return out;
}

}  // namespace klish
