#pragma once

// Dense tensor files.
//
// Layout: a 96-byte header followed by the row-major, little-endian payload.
// The header is the 7-byte magic "TSPREP\x01", then ASCII text
// "<dtype> <rank> <dim0> ... <dimN-1>" padded with spaces, with byte 95 = '\n'.
// dtype is one of f32, f64, i64.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "tsprep/error.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/text.hpp"

namespace tsprep::io {

enum class DType : std::uint8_t { f32, f64, i64 };

inline constexpr std::size_t kHeaderSize = 96;
inline constexpr std::string_view kMagic{"TSPREP\x01", 7};

inline std::string_view dtype_name(DType d) {
  switch (d) {
    case DType::f32: return "f32";
    case DType::f64: return "f64";
    case DType::i64: return "i64";
  }
  return "?";
}

inline DType parse_dtype(std::string_view s) {
  if (s == "f32") return DType::f32;
  if (s == "f64") return DType::f64;
  if (s == "i64") return DType::i64;
  throw ConfigError("unknown dtype '" + std::string(s) + "' (expected f32, f64 or i64)");
}

inline std::size_t dtype_size(DType d) { return d == DType::f32 ? 4 : 8; }

struct TensorHeader {
  DType dtype = DType::f64;
  Shape shape;
};

inline std::string encode_header(DType dtype, const Shape& shape) {
  std::string body(dtype_name(dtype));
  body += " " + std::to_string(shape.size());
  for (auto d : shape) body += " " + std::to_string(d);
  if (kMagic.size() + body.size() + 1 > kHeaderSize) throw ConfigError("tensor rank too large for header");
  std::string out(kMagic);
  out += body;
  out.resize(kHeaderSize - 1, ' ');
  out += '\n';
  return out;
}

inline TensorHeader decode_header(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || bytes.substr(0, kMagic.size()) != kMagic || bytes[kHeaderSize - 1] != '\n')
    throw ParseError("not a tensor file (bad header)");
  std::istringstream in(std::string(bytes.substr(kMagic.size(), kHeaderSize - kMagic.size() - 1)));
  std::string dtype;
  std::size_t rank = 0;
  if (!(in >> dtype >> rank)) throw ParseError("malformed tensor header");
  TensorHeader h{parse_dtype(dtype), Shape(rank)};
  for (auto& d : h.shape)
    if (!(in >> d)) throw ParseError("malformed tensor header dims");
  std::string extra;
  if (in >> extra) throw ParseError("trailing data in tensor header");
  return h;
}

namespace detail {

inline void put_le(std::string& out, std::uint64_t bits, std::size_t width) {
  for (std::size_t b = 0; b < width; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xff);
}

inline std::uint64_t get_le(const char* p, std::size_t width) {
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < width; ++b) bits |= std::uint64_t{static_cast<unsigned char>(p[b])} << (8 * b);
  return bits;
}

}  // namespace detail

/// Real tensor as f32 (round to nearest) or f64.
inline std::string encode(const Tensor<double>& t, DType dtype) {
  if (dtype == DType::i64) throw ConfigError("real tensors are stored as f32 or f64");
  std::string out = encode_header(dtype, t.shape());
  out.reserve(out.size() + t.size() * dtype_size(dtype));
  for (double v : t.values()) {
    if (dtype == DType::f64) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    else detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  }
  return out;
}

inline std::string encode(const Tensor<std::int64_t>& t) {
  std::string out = encode_header(DType::i64, t.shape());
  for (auto v : t.values()) detail::put_le(out, static_cast<std::uint64_t>(v), 8);
  return out;
}

inline std::string_view payload_of(std::string_view bytes, const TensorHeader& h) {
  const std::size_t expected = shape_size(h.shape) * dtype_size(h.dtype);
  if (bytes.size() != kHeaderSize + expected)
    throw ParseError("tensor payload is " + std::to_string(bytes.size() - kHeaderSize) + " bytes, expected " +
                     std::to_string(expected));
  return bytes.substr(kHeaderSize);
}

/// Reads f32 or f64 data; f32 values widen exactly.
inline Tensor<double> decode_real(std::string_view bytes) {
  const auto h = decode_header(bytes);
  if (h.dtype == DType::i64) throw ParseError("expected a real tensor, found i64");
  const auto payload = payload_of(bytes, h);
  Tensor<double> t(h.shape);
  const std::size_t w = dtype_size(h.dtype);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto bits = detail::get_le(payload.data() + k * w, w);
    t.values()[k] = w == 8 ? std::bit_cast<double>(bits)
                           : static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(bits)));
  }
  return t;
}

inline Tensor<std::int64_t> decode_int(std::string_view bytes) {
  const auto h = decode_header(bytes);
  if (h.dtype != DType::i64) throw ParseError("expected an i64 tensor");
  const auto payload = payload_of(bytes, h);
  Tensor<std::int64_t> t(h.shape);
  for (std::size_t k = 0; k < t.size(); ++k)
    t.values()[k] = static_cast<std::int64_t>(detail::get_le(payload.data() + k * 8, 8));
  return t;
}

// NumPy .npy (format 1.0), for consumers that prefer numpy.load.

inline std::string npy_header(std::string_view descr, const Shape& shape) {
  std::string dict = "{'descr': '" + std::string(descr) + "', 'fortran_order': False, 'shape': (";
  for (std::size_t k = 0; k < shape.size(); ++k) dict += (k ? ", " : "") + std::to_string(shape[k]);
  if (shape.size() == 1) dict += ",";
  dict += "), }";
  std::string out("\x93NUMPY\x01\x00", 8);
  std::size_t total = out.size() + 2 + dict.size() + 1;
  dict.append((64 - total % 64) % 64, ' ');
  dict += '\n';
  detail::put_le(out, dict.size(), 2);
  return out + dict;
}

inline std::string encode_npy(const Tensor<double>& t, DType dtype) {
  if (dtype == DType::i64) throw ConfigError("real tensors are stored as f32 or f64");
  std::string out = npy_header(dtype == DType::f64 ? "<f8" : "<f4", t.shape());
  for (double v : t.values()) {
    if (dtype == DType::f64) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    else detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  }
  return out;
}

inline std::string encode_npy(const Tensor<std::int64_t>& t) {
  std::string out = npy_header("<i8", t.shape());
  for (auto v : t.values()) detail::put_le(out, static_cast<std::uint64_t>(v), 8);
  return out;
}

// Whole-file helpers.

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tsprep::io
