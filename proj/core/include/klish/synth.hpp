#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "klish/types.hpp"

namespace klish::synth {

struct Labeled {
  FeatureDataset data;
  ClusterAssignment labels;
};

struct Fig2Toy {
  Labeled set;
  /// Per-class IoU of an SVM trained on the groundtruth (all 1.0 when certified).
  std::vector<double> certificate;
  bool certified = false;
};

/// Three 2-D classes, each a union of two anisotropic Gaussian lobes kept
/// inside its own 120-degree wedge (0.2-wide band around each ray excluded).
/// Lobes sit near the wedge edges, so a class centroid lies between them and
/// nearest-centroid labeling fails while the classes stay linearly separable.
Fig2Toy gen_fig2_toy(int n_per_cluster, std::uint64_t seed, int threads = 0);

/// Isotropic unit-variance blobs whose centers are at least `sep` apart.
Labeled gen_blobs(int k, int n, int d, double sep, std::uint64_t seed);

/// Two interleaved half circles with Gaussian noise; the second one is moved
/// down by `gap` (0 gives the classic interleaving).
Labeled gen_two_moons(int n_per_moon, double noise, double gap, std::uint64_t seed);

struct Straddle {
  Labeled set;
  /// Initial centroids; row `pinned` sits between two classes.
  Matrix centroids;
  int pinned = 0;
};

/// Seven compact lobes in three classes. Four of them lie on a line
/// (A A B B) with the pinned centroid between the middle pair, so its cell
/// cannot be cut out by a single hyperplane. Without the pin every cell is
/// exactly one class region.
Straddle gen_straddle(std::uint64_t seed, int n_per_lobe = 100);
/// The same instance with the pinned centroid removed.
Matrix straddle_centroids_without_pin(const Straddle& s);

}  // namespace klish::synth
