#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "klish/types.hpp"

namespace klish::io {

using Rgb = std::array<std::uint8_t, 3>;

/// k colors stepped evenly in hue: color i = HSV(i * 360 / k, 0.75, 0.9).
struct Palette {
  std::vector<Rgb> colors;

  static Palette for_clusters(int k);
  /// Color used for "unmatched" (class id 0 in a match vector).
  static constexpr Rgb unmatched() { return {0, 0, 0}; }
};

/// HSV (h in degrees, s, v in [0,1]) to 8-bit RGB, rounding to nearest.
Rgb hsv_to_rgb(double hue, double saturation, double value);

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major
};

void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

/// Renders one P6 PPM per image of the spatial grid into `out_dir`, named
/// `<prefix>_<index>.ppm`. Returns the written paths.
std::vector<std::filesystem::path> render_cluster_map(const ClusterAssignment& a, const Spatial& spatial,
                                                      const Palette& palette, const std::filesystem::path& out_dir,
                                                      const std::string& prefix = "clusters");

/// Square white canvas with one 3x3 dot per 2-D sample, colored by label.
/// The bounding box of the points is fit with a 5% border.
Image render_scatter(const Matrix& points, const ClusterAssignment& a, const Palette& palette,
                     std::size_t size = 512);

/// Maps every pixel back to its palette index. Throws if a color is not in the palette.
std::vector<int> quantize(const Image& image, const Palette& palette);

}  // namespace klish::io
