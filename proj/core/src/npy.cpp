#include "klish/npy.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "klish/error.hpp"

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace klish::npy {

namespace {

constexpr unsigned char kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreamble = 10;  // magic + version + header length
constexpr std::size_t kAlign = 64;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\n");
  return s.substr(b, e - b + 1);
}

// Returns the text after "'key':" up to (not including) the next top-level ',' or '}'.
std::string dict_value(const std::string& header, const std::string& key) {
  const auto pos = header.find("'" + key + "'");
  if (pos == std::string::npos) throw IoError("NPY header lacks '" + key + "'");
  auto colon = header.find(':', pos);
  if (colon == std::string::npos) throw IoError("NPY header malformed near '" + key + "'");
  std::size_t i = colon + 1;
  int depth = 0;
  std::string value;
  for (; i < header.size(); ++i) {
    const char c = header[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == ',' || c == '}')) break;
    value.push_back(c);
  }
  return trim(value);
}

Dtype parse_descr(const std::string& quoted) {
  if (quoted.size() < 2 || (quoted.front() != '\'' && quoted.front() != '"'))
    throw IoError("NPY descr is not a string: " + quoted);
  const std::string d = quoted.substr(1, quoted.size() - 2);
  if (d == "<f4") return Dtype::kF4;
  if (d == "<f8") return Dtype::kF8;
  if (d == "<i4") return Dtype::kI4;
  if (d == "<i8") return Dtype::kI8;
  throw IoError("unsupported NPY dtype '" + d + "' (expected <f4, <f8, <i4 or <i8)");
}

std::vector<std::size_t> parse_shape(const std::string& text) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')')
    throw IoError("NPY shape is not a tuple: " + text);
  std::vector<std::size_t> shape;
  std::stringstream ss(text.substr(1, text.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw IoError("NPY shape entry is not an integer: " + item);
    }
    if (used != item.size()) throw IoError("NPY shape entry is not an integer: " + item);
    shape.push_back(static_cast<std::size_t>(v));
  }
  return shape;
}

std::string shape_text(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  return out + ")";
}

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

template <typename T>
T load(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void append(std::vector<unsigned char>& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

void write_bytes(const std::filesystem::path& path, const std::string& header,
                 const std::vector<unsigned char>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string descr(Dtype dtype) {
  switch (dtype) {
    case Dtype::kF4: return "<f4";
    case Dtype::kF8: return "<f8";
    case Dtype::kI4: return "<i4";
    case Dtype::kI8: return "<i8";
  }
  return {};
}

std::size_t item_size(Dtype dtype) {
  return (dtype == Dtype::kF4 || dtype == Dtype::kI4) ? 4 : 8;
}

bool is_integer(Dtype dtype) { return dtype == Dtype::kI4 || dtype == Dtype::kI8; }

std::size_t Array::elements() const { return product(shape); }

std::vector<double> Array::as_doubles() const {
  const std::size_t n = elements();
  const std::size_t w = item_size(dtype);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = payload.data() + i * w;
    switch (dtype) {
      case Dtype::kF4: out[i] = load<float>(p); break;
      case Dtype::kF8: out[i] = load<double>(p); break;
      case Dtype::kI4: out[i] = load<std::int32_t>(p); break;
      case Dtype::kI8: out[i] = static_cast<double>(load<std::int64_t>(p)); break;
    }
  }
  return out;
}

std::vector<std::int64_t> Array::as_ints() const {
  if (!is_integer(dtype)) throw InvalidArgument("NPY array has float dtype " + descr(dtype) + ", expected integers");
  const std::size_t n = elements();
  std::vector<std::int64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = payload.data() + i * item_size(dtype);
    out[i] = dtype == Dtype::kI4 ? load<std::int32_t>(p) : load<std::int64_t>(p);
  }
  return out;
}

std::string make_header(const std::vector<std::size_t>& shape, Dtype dtype) {
  std::string dict = "{'descr': '" + descr(dtype) + "', 'fortran_order': False, 'shape': " + shape_text(shape) + ", }";
  const std::size_t unpadded = kPreamble + dict.size() + 1;
  dict.append((kAlign - unpadded % kAlign) % kAlign, ' ');
  dict.push_back('\n');
  if (dict.size() > std::numeric_limits<std::uint16_t>::max()) throw InvalidArgument("NPY header too long");
  std::string header(reinterpret_cast<const char*>(kMagic), sizeof(kMagic));
  header.push_back('\x01');
  header.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  header.push_back(static_cast<char>(len & 0xff));
  header.push_back(static_cast<char>(len >> 8));
  return header + dict;
}

Array parse(std::span<const unsigned char> bytes) {
  if (bytes.size() < kPreamble || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw IoError("not an NPY file (bad magic)");
  if (bytes[6] != 1 || bytes[7] != 0)
    throw IoError("unsupported NPY version " + std::to_string(bytes[6]) + "." + std::to_string(bytes[7]));
  const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreamble + header_len) throw IoError("truncated NPY header");
  const std::string header(reinterpret_cast<const char*>(bytes.data()) + kPreamble, header_len);

  Array out;
  out.dtype = parse_descr(dict_value(header, "descr"));
  if (dict_value(header, "fortran_order") != "False") throw IoError("Fortran-ordered NPY arrays are not supported");
  out.shape = parse_shape(dict_value(header, "shape"));

  const std::size_t expected = out.elements() * item_size(out.dtype);
  const std::size_t available = bytes.size() - kPreamble - header_len;
  if (available != expected)
    throw IoError("NPY payload is " + std::to_string(available) + " bytes, header implies " + std::to_string(expected));
  const auto* begin = bytes.data() + kPreamble + header_len;
  out.payload.assign(begin, begin + expected);
  return out;
}

Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
           std::span<const double> values, Dtype dtype) {
  if (values.size() != product(shape)) throw InvalidArgument("NPY write: shape does not match value count");
  std::vector<unsigned char> payload;
  payload.reserve(values.size() * item_size(dtype));
  for (double v : values) {
    switch (dtype) {
      case Dtype::kF4: append(payload, static_cast<float>(v)); break;
      case Dtype::kF8: append(payload, v); break;
      case Dtype::kI4: append(payload, static_cast<std::int32_t>(v)); break;
      case Dtype::kI8: append(payload, static_cast<std::int64_t>(v)); break;
    }
  }
  write_bytes(path, make_header(shape, dtype), payload);
}

void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
           std::span<const std::int64_t> values, Dtype dtype) {
  if (values.size() != product(shape)) throw InvalidArgument("NPY write: shape does not match value count");
  std::vector<unsigned char> payload;
  payload.reserve(values.size() * item_size(dtype));
  for (auto v : values) {
    switch (dtype) {
      case Dtype::kF4: append(payload, static_cast<float>(v)); break;
      case Dtype::kF8: append(payload, static_cast<double>(v)); break;
      case Dtype::kI4:
        if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max())
          throw InvalidArgument("value does not fit in <i4");
        append(payload, static_cast<std::int32_t>(v));
        break;
      case Dtype::kI8: append(payload, v); break;
    }
  }
  write_bytes(path, make_header(shape, dtype), payload);
}

}  // namespace klish::npy
