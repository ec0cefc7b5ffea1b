#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "klish/npy.hpp"
#include "klish/types.hpp"

namespace klish::io {

enum class Format { kNpy, kCsv, kRawF32 };

/// A feature or label array on disk.
struct ArrayFile {
  std::filesystem::path path;
  Format format = Format::kNpy;
  /// Required for raw-f32 (N,D) or (B,H,W,D); ignored otherwise.
  std::vector<std::size_t> shape;
  /// CSV only: the last column holds integer labels.
  bool labels_last = false;
};

/// Guesses the format from the extension: .npy, .csv, anything else is raw-f32.
Format infer_format(const std::filesystem::path& path);
ArrayFile array_file(const std::filesystem::path& path);

struct LoadedFeatures {
  FeatureDataset dataset;
  std::optional<ClusterAssignment> labels;  // CSV with labels_last
};

/// Reads N x D features. (B,H,W,D) arrays are flattened with their spatial
/// provenance kept. Non-finite values are rejected.
LoadedFeatures load_features(const ArrayFile& file);

void save_features(const std::filesystem::path& path, const FeatureDataset& d,
                   npy::Dtype dtype = npy::Dtype::kF4);

struct LabelFile {
  ClusterAssignment assignment;
  std::optional<Spatial> spatial;  // from a (B,H,W) label array
};

/// k is max label + 1 unless `k_override` is given (and large enough).
LabelFile load_labels(const ArrayFile& file, std::optional<int> k_override = std::nullopt);
/// Writes int32 NPY of shape (N,) or (B,H,W) when `spatial` is given.
void save_labels(const std::filesystem::path& path, const ClusterAssignment& a,
                 const std::optional<Spatial>& spatial = std::nullopt);

/// JSON with shortest round-trip doubles; lossless for 64-bit values.
void save_classifier(const std::filesystem::path& path, const LinearClassifier& c);
LinearClassifier load_classifier(const std::filesystem::path& path);

}  // namespace klish::io
