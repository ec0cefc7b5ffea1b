#include "klish/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "klish/error.hpp"
#include "klish/serialize.hpp"

namespace klish::io {

namespace {

FeatureDataset from_flat(const std::vector<double>& values, const std::vector<std::size_t>& shape,
                         const std::string& origin) {
  FeatureDataset d;
  std::size_t n = 0;
  std::size_t dim = 0;
  switch (shape.size()) {
    case 1: n = shape[0]; dim = 1; break;
    case 2: n = shape[0]; dim = shape[1]; break;
    case 3:
      d.spatial = Spatial{1, shape[0], shape[1]};
      n = shape[0] * shape[1];
      dim = shape[2];
      break;
    case 4:
      d.spatial = Spatial{shape[0], shape[1], shape[2]};
      n = shape[0] * shape[1] * shape[2];
      dim = shape[3];
      break;
    default: throw IoError(origin + ": feature arrays must have 1 to 4 dimensions");
  }
  if (n == 0 || dim == 0) throw IoError(origin + ": empty feature array");
  d.data = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw IoError(origin + ": non-finite value at (" + std::to_string(i / dim) + "," + std::to_string(i % dim) + ")");
  }
  return d;
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

// Numeric CSV rows; a leading non-numeric row is treated as a header.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size() && numeric; ++j) numeric = parse_double(fields[j], row[j]);
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": no data rows");
  return rows;
}

int checked_label(double v, const std::string& origin) {
  if (v != std::floor(v)) throw IoError(origin + ": label " + std::to_string(v) + " is not an integer");
  if (v < 0) throw InvalidArgument(origin + ": negative label " + std::to_string(static_cast<long long>(v)));
  if (v > 2147483647.0) throw IoError(origin + ": label out of range");
  return static_cast<int>(v);
}

}  // namespace

Format infer_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".npy") return Format::kNpy;
  if (ext == ".csv") return Format::kCsv;
  return Format::kRawF32;
}

ArrayFile array_file(const std::filesystem::path& path) { return ArrayFile{path, infer_format(path), {}, false}; }

LoadedFeatures load_features(const ArrayFile& file) {
  const std::string origin = file.path.string();
  LoadedFeatures out;
  switch (file.format) {
    case Format::kNpy: {
      const auto arr = npy::read(file.path);
      out.dataset = from_flat(arr.as_doubles(), arr.shape, origin);
      break;
    }
    case Format::kCsv: {
      const auto rows = read_csv(file.path);
      const std::size_t cols = rows.front().size();
      const std::size_t dim = file.labels_last ? cols - 1 : cols;
      if (dim == 0) throw IoError(origin + ": no feature columns");
      std::vector<double> flat;
      flat.reserve(rows.size() * dim);
      ClusterAssignment labels;
      for (const auto& row : rows) {
        flat.insert(flat.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(dim));
        if (file.labels_last) labels.labels.push_back(checked_label(row.back(), origin));
      }
      out.dataset = from_flat(flat, {rows.size(), dim}, origin);
      if (file.labels_last) {
        int max_label = 0;
        for (int l : labels.labels) max_label = std::max(max_label, l);
        labels.k = max_label + 1;
        out.labels = std::move(labels);
      }
      break;
    }
    case Format::kRawF32: {
      if (file.shape.size() != 2 && file.shape.size() != 4)
        throw InvalidArgument(origin + ": raw-f32 input needs a shape N,D or B,H,W,D");
      std::ifstream in(file.path, std::ios::binary);
      if (!in) throw IoError("cannot open " + origin);
      const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      std::size_t count = 1;
      for (auto s : file.shape) count *= s;
      if (bytes.size() != count * sizeof(float))
        throw IoError(origin + ": " + std::to_string(bytes.size()) + " bytes, shape implies " +
                      std::to_string(count * sizeof(float)));
      std::vector<double> flat(count);
      for (std::size_t i = 0; i < count; ++i) {
        float v;
        std::memcpy(&v, bytes.data() + i * sizeof(float), sizeof(float));
        flat[i] = v;
      }
      out.dataset = from_flat(flat, file.shape, origin);
      break;
    }
  }
  return out;
}

void save_features(const std::filesystem::path& path, const FeatureDataset& d, npy::Dtype dtype) {
  std::vector<std::size_t> shape;
  if (d.spatial) {
    shape = {d.spatial->images, d.spatial->height, d.spatial->width, static_cast<std::size_t>(d.dim())};
  } else {
    shape = {static_cast<std::size_t>(d.size()), static_cast<std::size_t>(d.dim())};
  }
  npy::write(path, shape, std::span<const double>(d.data.data(), static_cast<std::size_t>(d.data.size())), dtype);
}

LabelFile load_labels(const ArrayFile& file, std::optional<int> k_override) {
  const std::string origin = file.path.string();
  LabelFile out;
  std::vector<std::int64_t> raw;
  switch (file.format) {
    case Format::kNpy: {
      const auto arr = npy::read(file.path);
      if (!npy::is_integer(arr.dtype)) throw IoError(origin + ": labels must have an integer dtype");
      raw = arr.as_ints();
      if (arr.shape.size() == 3) out.spatial = Spatial{arr.shape[0], arr.shape[1], arr.shape[2]};
      else if (arr.shape.size() == 2 && arr.shape[1] != 1) out.spatial = Spatial{1, arr.shape[0], arr.shape[1]};
      else if (arr.shape.size() > 3) throw IoError(origin + ": label arrays must have at most 3 dimensions");
      break;
    }
    case Format::kCsv: {
      for (const auto& row : read_csv(file.path)) raw.push_back(checked_label(row.back(), origin));
      break;
    }
    case Format::kRawF32: throw IoError(origin + ": labels must be NPY or CSV");
  }
  out.assignment.labels.reserve(raw.size());
  int max_label = -1;
  for (auto v : raw) {
    if (v < 0) throw InvalidArgument(origin + ": negative label " + std::to_string(v));
    if (v > 2147483646) throw IoError(origin + ": label out of range");
    out.assignment.labels.push_back(static_cast<int>(v));
    max_label = std::max(max_label, static_cast<int>(v));
  }
  out.assignment.k = max_label + 1;
  if (k_override) {
    if (*k_override < out.assignment.k)
      throw InvalidArgument(origin + ": k override " + std::to_string(*k_override) + " is below max label + 1");
    out.assignment.k = *k_override;
  }
  if (out.assignment.k < 1) throw IoError(origin + ": empty label array");
  return out;
}

void save_labels(const std::filesystem::path& path, const ClusterAssignment& a, const std::optional<Spatial>& spatial) {
  std::vector<std::size_t> shape{a.labels.size()};
  if (spatial) {
    if (spatial->pixels() != a.labels.size()) throw InvalidArgument("spatial shape does not match label count");
    shape = {spatial->images, spatial->height, spatial->width};
  }
  const std::vector<std::int64_t> values(a.labels.begin(), a.labels.end());
  npy::write(path, shape, std::span<const std::int64_t>(values), npy::Dtype::kI4);
}

void save_classifier(const std::filesystem::path& path, const LinearClassifier& c) {
  write_json_file(path, Json(c));
}

LinearClassifier load_classifier(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return j.get<LinearClassifier>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace klish::io
