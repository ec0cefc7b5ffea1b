#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace klish::npy {

// NPY v1.0 subset: little-endian, C order, f4/f8/i4/i8, no pickles.

enum class Dtype { kF4, kF8, kI4, kI8 };

std::string descr(Dtype dtype);
std::size_t item_size(Dtype dtype);
bool is_integer(Dtype dtype);

struct Array {
  std::vector<std::size_t> shape;
  Dtype dtype = Dtype::kF8;
  std::vector<unsigned char> payload;  // raw little-endian bytes

  std::size_t elements() const;
  std::vector<double> as_doubles() const;
  /// Throws InvalidArgument for float dtypes.
  std::vector<std::int64_t> as_ints() const;
};

/// Builds the full header (magic through trailing newline), 64-byte aligned.
std::string make_header(const std::vector<std::size_t>& shape, Dtype dtype);

Array read(const std::filesystem::path& path);
Array parse(std::span<const unsigned char> bytes);

void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
           std::span<const double> values, Dtype dtype = Dtype::kF8);
void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
           std::span<const std::int64_t> values, Dtype dtype = Dtype::kI8);

}  // namespace klish::npy
