#include "klish/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "klish/error.hpp"
#include "klish/rng.hpp"
#include "klish/svm.hpp"

namespace klish::synth {

namespace {

constexpr double kPi = std::numbers::pi;

struct Lobe {
  double r, t;    // center in the wedge frame (radial, tangential)
  double sr, st;  // standard deviations
  double weight;
};

// Per class: two lobes in the frame of the wedge bisector.
constexpr std::array<std::array<Lobe, 2>, 3> kToyLobes{{
    {{{2.2, -1.8, 0.2, 0.4, 0.5}, {2.2, 1.8, 0.2, 0.4, 0.5}}},
    {{{2.3, -2.2, 0.4, 0.15, 0.7}, {2.0, -1.6, 0.15, 0.15, 0.3}}},
    {{{2.3, 2.2, 0.4, 0.15, 0.7}, {2.0, 1.6, 0.15, 0.15, 0.3}}},
}};
constexpr double kWedgeHalfAngle = kPi / 3.0;
constexpr double kBandHalfWidth = 0.1;
constexpr double kMinRadial = 1.75;
constexpr double kMaxRadius = 3.2;

bool inside_wedge(double r, double t) {
  if (r < kMinRadial) return false;
  const double radius = std::hypot(r, t);
  if (radius > kMaxRadius) return false;
  const double angle = std::atan2(std::fabs(t), r);
  if (angle >= kWedgeHalfAngle) return false;
  return radius * std::sin(kWedgeHalfAngle - angle) >= kBandHalfWidth;
}

}  // namespace

Fig2Toy gen_fig2_toy(int n_per_cluster, std::uint64_t seed, int threads) {
  if (n_per_cluster < 10) throw InvalidArgument("gen_fig2_toy: n_per_cluster must be >= 10");
  Rng rng(seed);
  Fig2Toy out;
  const auto n = static_cast<Eigen::Index>(3 * n_per_cluster);
  out.set.data.data.resize(n, 2);
  out.set.labels.k = 3;
  out.set.labels.labels.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int c = 0; c < 3; ++c) {
    const double theta = kPi / 2.0 + 2.0 * kPi / 3.0 * c;
    const double ux = std::cos(theta), uy = std::sin(theta);
    for (int i = 0; i < n_per_cluster; ++i) {
      const Lobe& lobe = rng.uniform() < kToyLobes[c][0].weight ? kToyLobes[c][0] : kToyLobes[c][1];
      double r, t;
      do {
        r = lobe.r + lobe.sr * rng.normal();
        t = lobe.t + lobe.st * rng.normal();
      } while (!inside_wedge(r, t));
      out.set.data.data(row, 0) = r * ux - t * uy;
      out.set.data.data(row, 1) = r * uy + t * ux;
      out.set.labels.labels.push_back(c);
      ++row;
    }
  }

  TrainOptions opts;
  opts.threads = threads;
  auto [svm, diag] = train_svm(LinearClassifier::zeros(3, 2), out.set.data, out.set.labels, opts);
  out.certificate = iou_per_cluster(svm, out.set.data, out.set.labels, threads);
  out.certified = true;
  for (double v : out.certificate) out.certified = out.certified && v == 1.0;
  return out;
}

Labeled gen_blobs(int k, int n, int d, double sep, std::uint64_t seed) {
  if (k < 1 || n < 1 || d < 1) throw InvalidArgument("gen_blobs: k, n and d must be >= 1");
  if (static_cast<double>(k) * n > 1e7) throw InvalidArgument("gen_blobs: k*n exceeds 1e7");
  if (sep < 0.0) throw InvalidArgument("gen_blobs: sep must be >= 0");
  Rng rng(seed);

  // Rejection-place centers in a cube that grows until k of them fit.
  Matrix centers(k, d);
  double side = std::max(sep, 1.0) * std::pow(static_cast<double>(k), 1.0 / d) * 2.0;
  int placed = 0, misses = 0;
  while (placed < k) {
    Eigen::RowVectorXd c(d);
    for (int j = 0; j < d; ++j) c(j) = (rng.uniform() - 0.5) * side;
    bool ok = true;
    for (int p = 0; p < placed && ok; ++p) ok = (centers.row(p) - c).norm() >= sep;
    if (ok) {
      centers.row(placed++) = c;
      misses = 0;
    } else if (++misses > 1000) {
      side *= 1.5;
      misses = 0;
    }
  }

  Labeled out;
  out.data.data.resize(static_cast<Eigen::Index>(k) * n, d);
  out.labels.k = k;
  out.labels.labels.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n; ++i, ++row) {
      for (int j = 0; j < d; ++j) out.data.data(row, j) = centers(c, j) + rng.normal();
      out.labels.labels.push_back(c);
    }
  }
  return out;
}

Labeled gen_two_moons(int n_per_moon, double noise, double gap, std::uint64_t seed) {
  if (n_per_moon < 1) throw InvalidArgument("gen_two_moons: n_per_moon must be >= 1");
  Rng rng(seed);
  Labeled out;
  out.data.data.resize(2 * static_cast<Eigen::Index>(n_per_moon), 2);
  out.labels.k = 2;
  Eigen::Index row = 0;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n_per_moon; ++i, ++row) {
      const double a = kPi * rng.uniform();
      double x = std::cos(a), y = std::sin(a);
      if (c == 1) {
        x = 1.0 - x;
        y = 0.5 - y - gap;
      }
      out.data.data(row, 0) = x + noise * rng.normal();
      out.data.data(row, 1) = y + noise * rng.normal();
      out.labels.labels.push_back(c);
    }
  }
  return out;
}

namespace {

struct StraddleLobe {
  double x, y;
  int label;
};

// A1 A2 B1 B2 on the x axis, C1 C2 C3 above.
constexpr std::array<StraddleLobe, 7> kStraddleLobes{{
    {0.0, 0.0, 0},
    {1.0, 0.0, 0},
    {2.0, 0.0, 1},
    {3.0, 0.0, 1},
    {0.5, 3.0, 2},
    {1.5, 4.0, 2},
    {2.5, 3.0, 2},
}};
constexpr double kStraddleSigma = 0.08;

}  // namespace

Straddle gen_straddle(std::uint64_t seed, int n_per_lobe) {
  if (n_per_lobe < 1) throw InvalidArgument("gen_straddle: n_per_lobe must be >= 1");
  Rng rng(seed);
  Straddle out;
  const auto n = static_cast<Eigen::Index>(kStraddleLobes.size()) * n_per_lobe;
  out.set.data.data.resize(n, 2);
  out.set.labels.k = 3;
  Eigen::Index row = 0;
  for (const auto& lobe : kStraddleLobes) {
    for (int i = 0; i < n_per_lobe; ++i, ++row) {
      out.set.data.data(row, 0) = lobe.x + kStraddleSigma * rng.normal();
      out.set.data.data(row, 1) = lobe.y + kStraddleSigma * rng.normal();
      out.set.labels.labels.push_back(lobe.label);
    }
  }
  // A1, B2, the three C lobes, and the pin halfway between A2 and B1.
  out.centroids.resize(6, 2);
  out.centroids << 0.0, 0.0,  //
      3.0, 0.0,               //
      0.5, 3.0,               //
      1.5, 4.0,               //
      2.5, 3.0,               //
      1.5, 0.0;
  out.pinned = 5;
  return out;
}

Matrix straddle_centroids_without_pin(const Straddle& s) {
  Matrix out(s.centroids.rows() - 1, s.centroids.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.centroids.rows(); ++i)
    if (i != s.pinned) out.row(r++) = s.centroids.row(i);
  return out;
}

}  // namespace klish::synth
