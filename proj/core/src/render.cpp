#include "klish/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "klish/error.hpp"

namespace klish::io {

Rgb hsv_to_rgb(double hue, double saturation, double value) {
  hue = std::fmod(hue, 360.0);
  if (hue < 0) hue += 360.0;
  const double c = value * saturation;
  const double x = c * (1.0 - std::fabs(std::fmod(hue / 60.0, 2.0) - 1.0));
  const double m = value - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hue / 60.0)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  auto to_byte = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return {to_byte(r + m), to_byte(g + m), to_byte(b + m)};
}

Palette Palette::for_clusters(int k) {
  if (k < 1) throw InvalidArgument("palette needs k >= 1");
  Palette p;
  p.colors.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) p.colors.push_back(hsv_to_rgb(std::fmod(i * 360.0 / k, 360.0), 0.75, 0.9));
  return p;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  if (image.pixels.size() != image.width * image.height) throw InvalidArgument("image pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size() * 3));
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  Image image;
  int maxval = 0;
  in >> magic >> image.width >> image.height >> maxval;
  if (magic != "P6" || maxval != 255 || !in) throw IoError(path.string() + ": not an 8-bit P6 PPM");
  in.get();
  image.pixels.resize(image.width * image.height);
  in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size() * 3));
  if (!in) throw IoError(path.string() + ": truncated pixel data");
  return image;
}

std::vector<std::filesystem::path> render_cluster_map(const ClusterAssignment& a, const Spatial& spatial,
                                                      const Palette& palette, const std::filesystem::path& out_dir,
                                                      const std::string& prefix) {
  if (spatial.pixels() != a.labels.size()) throw InvalidArgument("spatial shape does not match label count");
  if (static_cast<int>(palette.colors.size()) < a.k) throw InvalidArgument("palette has fewer colors than clusters");
  std::filesystem::create_directories(out_dir);
  const std::size_t per_image = spatial.height * spatial.width;
  std::vector<std::filesystem::path> written;
  for (std::size_t b = 0; b < spatial.images; ++b) {
    Image image{spatial.width, spatial.height, std::vector<Rgb>(per_image)};
    for (std::size_t p = 0; p < per_image; ++p) {
      image.pixels[p] = palette.colors[static_cast<std::size_t>(a.labels[b * per_image + p])];
    }
    auto path = out_dir / (prefix + "_" + std::to_string(b) + ".ppm");
    write_ppm(path, image);
    written.push_back(std::move(path));
  }
  return written;
}

Image render_scatter(const Matrix& points, const ClusterAssignment& a, const Palette& palette, std::size_t size) {
  if (points.cols() != 2) throw InvalidArgument("render_scatter: points must be 2-D");
  if (a.size() != static_cast<std::size_t>(points.rows())) throw InvalidArgument("render_scatter: label count != N");
  if (static_cast<int>(palette.colors.size()) < a.k) throw InvalidArgument("render_scatter: palette smaller than k");
  if (size < 8) throw InvalidArgument("render_scatter: size must be >= 8");
  Image img{size, size, std::vector<Rgb>(size * size, Rgb{255, 255, 255})};
  if (points.rows() == 0) return img;
  const Eigen::RowVector2d lo = points.colwise().minCoeff();
  const Eigen::RowVector2d hi = points.colwise().maxCoeff();
  const double span = std::max({hi(0) - lo(0), hi(1) - lo(1), 1e-12});
  const double scale = 0.9 * static_cast<double>(size - 1) / span;
  const double border = 0.05 * static_cast<double>(size - 1);
  const auto last = static_cast<long>(size) - 1;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const long cx = std::lround(border + (points(i, 0) - lo(0)) * scale);
    // Image rows grow downward.
    const long cy = last - std::lround(border + (points(i, 1) - lo(1)) * scale);
    const Rgb color = palette.colors[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)])];
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        const long x = std::clamp(cx + dx, 0L, last), y = std::clamp(cy + dy, 0L, last);
        img.pixels[static_cast<std::size_t>(y) * size + static_cast<std::size_t>(x)] = color;
      }
    }
  }
  return img;
}

std::vector<int> quantize(const Image& image, const Palette& palette) {
  std::map<Rgb, int> index;
  for (std::size_t i = 0; i < palette.colors.size(); ++i) index.emplace(palette.colors[i], static_cast<int>(i));
  std::vector<int> labels;
  labels.reserve(image.pixels.size());
  for (const auto& px : image.pixels) {
    const auto it = index.find(px);
    if (it == index.end()) throw InvalidArgument("pixel color not in palette");
    labels.push_back(it->second);
  }
  return labels;
}

}  // namespace klish::io
