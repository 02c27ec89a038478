#ifndef PHASERET_DATASETS_IO_HPP
#define PHASERET_DATASETS_IO_HPP

// Transmission-matrix dataset container (.tmds), all integers little-endian:
//
//   offset  size  field
//   0       8     magic "PHPACKTM"
//   8       2     version (u16, currently 1)
//   10      4     m (u32, measurements)
//   14      4     n (u32, signal length)
//   18      4     flags (u32): bit 0 ground truth present, bit 1 complex matrix
//   22      ...   A, row-major: m*n (f32 re, f32 im) pairs, or m*n f32 if real
//           4m    b, f32
//           8n    x_true as (f32 re, f32 im) pairs, only with flag bit 0
//
// The file must end exactly after the last field.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseret/file_util.hpp"
#include "phaseret/operators.hpp"
#include "phaseret/types.hpp"

namespace phaseret {

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, bad_flags, truncated_payload, size_mismatch, invalid_values };

  DatasetError(Kind kind, const std::string& detail)
      : std::runtime_error(std::string(name(kind)) + ": " + detail), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

  static std::string_view name(Kind k) {
    switch (k) {
      case Kind::io: return "io-error";
      case Kind::bad_magic: return "bad-magic";
      case Kind::bad_version: return "version-mismatch";
      case Kind::bad_flags: return "bad-flags";
      case Kind::truncated_payload: return "truncated-payload";
      case Kind::size_mismatch: return "size-mismatch";
      case Kind::invalid_values: return "invalid-values";
    }
    return "?";
  }

 private:
  Kind kind_;
};

struct TmDataset {
  static constexpr std::string_view kMagic = "PHPACKTM";
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::uint32_t kFlagGroundTruth = 1u << 0;
  static constexpr std::uint32_t kFlagComplex = 1u << 1;
  static constexpr std::size_t kHeaderBytes = 22;

  std::uint32_t m = 0;
  std::uint32_t n = 0;
  bool is_complex = true;
  /// Row-major m x n; imaginary parts are zero when !is_complex.
  std::vector<std::complex<float>> a;
  std::vector<float> b;
  std::optional<std::vector<std::complex<float>>> x_true;
};

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline std::uint32_t get_u32(std::string_view in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)]);
  return v;
}

inline std::uint16_t get_u16(std::string_view in, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[off]) |
                                    (static_cast<unsigned char>(in[off + 1]) << 8));
}

inline float get_f32(std::string_view in, std::size_t off) { return std::bit_cast<float>(get_u32(in, off)); }

inline void check_consistent(const TmDataset& ds) {
  using K = DatasetError::Kind;
  if (ds.m == 0 || ds.n == 0) throw DatasetError(K::size_mismatch, "m and n must be positive");
  if (ds.a.size() != static_cast<std::size_t>(ds.m) * ds.n)
    throw DatasetError(K::size_mismatch, "matrix has " + std::to_string(ds.a.size()) + " entries, expected m*n = " +
                                             std::to_string(static_cast<std::size_t>(ds.m) * ds.n));
  if (ds.b.size() != ds.m) throw DatasetError(K::size_mismatch, "b length differs from m");
  if (ds.x_true && ds.x_true->size() != ds.n) throw DatasetError(K::size_mismatch, "x_true length differs from n");
  for (float v : ds.b)
    if (!std::isfinite(v) || v < 0.0f) throw DatasetError(K::invalid_values, "b must be finite and nonnegative");
  for (const auto& z : ds.a)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw DatasetError(K::invalid_values, "matrix entries must be finite");
}

}  // namespace detail

inline std::string encode_tm(const TmDataset& ds) {
  detail::check_consistent(ds);
  std::string out;
  const std::size_t per = ds.is_complex ? 8 : 4;
  out.reserve(TmDataset::kHeaderBytes + ds.a.size() * per + 4 * ds.b.size() + (ds.x_true ? 8 * ds.n : 0));
  out.append(TmDataset::kMagic);
  detail::put_u16(out, TmDataset::kVersion);
  detail::put_u32(out, ds.m);
  detail::put_u32(out, ds.n);
  std::uint32_t flags = 0;
  if (ds.x_true) flags |= TmDataset::kFlagGroundTruth;
  if (ds.is_complex) flags |= TmDataset::kFlagComplex;
  detail::put_u32(out, flags);
  for (const auto& z : ds.a) {
    detail::put_f32(out, z.real());
    if (ds.is_complex) detail::put_f32(out, z.imag());
  }
  for (float v : ds.b) detail::put_f32(out, v);
  if (ds.x_true)
    for (const auto& z : *ds.x_true) {
      detail::put_f32(out, z.real());
      detail::put_f32(out, z.imag());
    }
  return out;
}

/// Parses a complete .tmds byte image. Throws DatasetError and never returns
/// a partially filled dataset.
inline TmDataset decode_tm(std::string_view bytes) {
  using K = DatasetError::Kind;
  if (bytes.size() < TmDataset::kMagic.size() || bytes.substr(0, TmDataset::kMagic.size()) != TmDataset::kMagic)
    throw DatasetError(K::bad_magic, "file does not start with \"PHPACKTM\"");
  if (bytes.size() < TmDataset::kHeaderBytes)
    throw DatasetError(K::truncated_payload, "header needs " + std::to_string(TmDataset::kHeaderBytes) +
                                                 " bytes, got " + std::to_string(bytes.size()));
  const std::uint16_t version = detail::get_u16(bytes, 8);
  if (version != TmDataset::kVersion)
    throw DatasetError(K::bad_version, "version " + std::to_string(version) + ", expected " +
                                           std::to_string(TmDataset::kVersion));
  TmDataset ds;
  ds.m = detail::get_u32(bytes, 10);
  ds.n = detail::get_u32(bytes, 14);
  const std::uint32_t flags = detail::get_u32(bytes, 18);
  if ((flags & ~(TmDataset::kFlagGroundTruth | TmDataset::kFlagComplex)) != 0)
    throw DatasetError(K::bad_flags, "unknown flag bits set: " + std::to_string(flags));
  if (ds.m == 0 || ds.n == 0) throw DatasetError(K::size_mismatch, "m and n must be positive");
  ds.is_complex = (flags & TmDataset::kFlagComplex) != 0;
  const bool has_truth = (flags & TmDataset::kFlagGroundTruth) != 0;

  const std::uint64_t entries = static_cast<std::uint64_t>(ds.m) * ds.n;
  if (entries > (std::uint64_t{1} << 40)) throw DatasetError(K::size_mismatch, "declared matrix is implausibly large");
  const std::uint64_t expected = TmDataset::kHeaderBytes + entries * (ds.is_complex ? 8u : 4u) +
                                 4ull * ds.m + (has_truth ? 8ull * ds.n : 0ull);
  if (bytes.size() < expected)
    throw DatasetError(K::truncated_payload, "expected " + std::to_string(expected) + " bytes, got " +
                                                 std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw DatasetError(K::size_mismatch, "expected " + std::to_string(expected) + " bytes, got " +
                                             std::to_string(bytes.size()) + " (trailing data)");

  std::size_t off = TmDataset::kHeaderBytes;
  ds.a.resize(static_cast<std::size_t>(entries));
  for (auto& z : ds.a) {
    const float re = detail::get_f32(bytes, off);
    off += 4;
    float im = 0.0f;
    if (ds.is_complex) {
      im = detail::get_f32(bytes, off);
      off += 4;
    }
    z = {re, im};
  }
  ds.b.resize(ds.m);
  for (auto& v : ds.b) {
    v = detail::get_f32(bytes, off);
    off += 4;
  }
  if (has_truth) {
    std::vector<std::complex<float>> x(ds.n);
    for (auto& z : x) {
      z = {detail::get_f32(bytes, off), detail::get_f32(bytes, off + 4)};
      off += 8;
    }
    ds.x_true = std::move(x);
  }
  detail::check_consistent(ds);
  return ds;
}

inline void save_tm(const TmDataset& ds, const std::filesystem::path& path) {
  const std::string bytes = encode_tm(ds);
  try {
    write_file_atomic(path, bytes);
  } catch (const IoError& e) {
    throw DatasetError(DatasetError::Kind::io, e.what());
  }
}

inline TmDataset load_tm_dataset(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const IoError& e) {
    throw DatasetError(DatasetError::Kind::io, e.what());
  }
  return decode_tm(bytes);
}

/// Float32 snapshot of a dense problem. Real storage drops imaginary parts.
inline TmDataset make_tm_dataset(const Mat& a, const RVec& b, const std::optional<Vec>& x_true, bool is_complex) {
  require(b.size() == a.rows(), "b length must equal matrix rows");
  if (x_true) require(x_true->size() == a.cols(), "x_true length must equal matrix columns");
  TmDataset ds;
  ds.m = static_cast<std::uint32_t>(a.rows());
  ds.n = static_cast<std::uint32_t>(a.cols());
  ds.is_complex = is_complex;
  ds.a.reserve(static_cast<std::size_t>(a.size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      ds.a.emplace_back(static_cast<float>(a(i, j).real()), is_complex ? static_cast<float>(a(i, j).imag()) : 0.0f);
  ds.b.reserve(static_cast<std::size_t>(b.size()));
  for (Index i = 0; i < b.size(); ++i) ds.b.push_back(static_cast<float>(b[i]));
  if (x_true) {
    std::vector<std::complex<float>> x;
    x.reserve(static_cast<std::size_t>(x_true->size()));
    for (Index i = 0; i < x_true->size(); ++i)
      x.emplace_back(static_cast<float>((*x_true)[i].real()), static_cast<float>((*x_true)[i].imag()));
    ds.x_true = std::move(x);
  }
  detail::check_consistent(ds);
  return ds;
}

/// Dense-operator instance over the stored (float32-exact) values.
inline Instance to_instance(const TmDataset& ds, std::string label = {}) {
  Mat a(ds.m, ds.n);
  for (std::uint32_t i = 0; i < ds.m; ++i)
    for (std::uint32_t j = 0; j < ds.n; ++j) {
      const auto& z = ds.a[static_cast<std::size_t>(i) * ds.n + j];
      a(i, j) = Complex(z.real(), z.imag());
    }
  RVec b(ds.m);
  for (std::uint32_t i = 0; i < ds.m; ++i) b[i] = ds.b[i];
  std::optional<Vec> x;
  if (ds.x_true) {
    Vec v(ds.n);
    for (std::uint32_t j = 0; j < ds.n; ++j) v[j] = Complex((*ds.x_true)[j].real(), (*ds.x_true)[j].imag());
    x = std::move(v);
  }
  if (label.empty()) label = std::string("tmds ") + (ds.is_complex ? "complex" : "real") + " m=" +
                             std::to_string(ds.m) + " n=" + std::to_string(ds.n);
  return Instance(dense_operator(std::move(a)), std::move(b), std::move(x), std::move(label));
}

inline Instance load_tm(const std::filesystem::path& path) {
  const TmDataset ds = load_tm_dataset(path);
  return to_instance(ds, std::string("tmds:") + path.string() + (ds.is_complex ? " (complex)" : " (real)"));
}

// ---------------------------------------------------------------------------
// 8-bit grayscale images as binary PGM ("P5", maxval 255).

class ImageError : public std::runtime_error {
 public:
  enum class Kind { io, malformed_header, dimension_mismatch, truncated_data };

  ImageError(Kind kind, const std::string& detail)
      : std::runtime_error(std::string(name(kind)) + ": " + detail), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

  static std::string_view name(Kind k) {
    switch (k) {
      case Kind::io: return "io-error";
      case Kind::malformed_header: return "malformed-header";
      case Kind::dimension_mismatch: return "dimension-mismatch";
      case Kind::truncated_data: return "truncated-data";
    }
    return "?";
  }

 private:
  Kind kind_;
};

struct ImageSignal {
  RVec x;
  int width = 0;
  int height = 0;
};

namespace detail {

inline bool is_pgm_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

/// Next whitespace-delimited header integer; skips '#' comments.
inline long pgm_header_int(std::string_view in, std::size_t& pos) {
  using K = ImageError::Kind;
  for (;;) {
    while (pos < in.size() && is_pgm_space(in[pos])) ++pos;
    if (pos < in.size() && in[pos] == '#') {
      while (pos < in.size() && in[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= in.size() || in[pos] < '0' || in[pos] > '9') throw ImageError(K::malformed_header, "expected an integer");
  long v = 0;
  while (pos < in.size() && in[pos] >= '0' && in[pos] <= '9') {
    v = v * 10 + (in[pos] - '0');
    if (v > 1'000'000'000L) throw ImageError(K::malformed_header, "header value too large");
    ++pos;
  }
  return v;
}

}  // namespace detail

inline ImageSignal decode_pgm(std::string_view in) {
  using K = ImageError::Kind;
  if (in.size() < 2 || in[0] != 'P' || in[1] != '5') throw ImageError(K::malformed_header, "missing P5 signature");
  std::size_t pos = 2;
  const long w = detail::pgm_header_int(in, pos);
  const long h = detail::pgm_header_int(in, pos);
  const long maxval = detail::pgm_header_int(in, pos);
  if (w <= 0 || h <= 0) throw ImageError(K::malformed_header, "width and height must be positive");
  if (maxval != 255) throw ImageError(K::malformed_header, "only 8-bit images (maxval 255) are supported");
  if (pos >= in.size() || !detail::is_pgm_space(in[pos]))
    throw ImageError(K::malformed_header, "missing separator after maxval");
  ++pos;
  const auto count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (in.size() - pos < count)
    throw ImageError(K::truncated_data, "expected " + std::to_string(count) + " pixel bytes, got " +
                                            std::to_string(in.size() - pos));
  ImageSignal img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.x.resize(static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i)
    img.x[static_cast<Index>(i)] = static_cast<unsigned char>(in[pos + i]) / 255.0;
  return img;
}

/// Pixels |x_i| clamped to [0, 1], scaled to 0..255 and rounded.
inline std::string encode_pgm(const RVec& magnitudes, int width, int height) {
  using K = ImageError::Kind;
  if (width <= 0 || height <= 0) throw ImageError(K::dimension_mismatch, "width and height must be positive");
  if (magnitudes.size() != static_cast<Index>(width) * height)
    throw ImageError(K::dimension_mismatch, "signal length " + std::to_string(magnitudes.size()) + " != " +
                                                std::to_string(width) + "x" + std::to_string(height));
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (Index i = 0; i < magnitudes.size(); ++i) {
    double v = std::abs(magnitudes[i]);
    v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

inline ImageSignal load_image_signal(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const IoError& e) {
    throw ImageError(ImageError::Kind::io, e.what());
  }
  return decode_pgm(bytes);
}

inline void save_image_signal(const RVec& x, int width, int height, const std::filesystem::path& path) {
  const std::string bytes = encode_pgm(x, width, height);
  try {
    write_file_atomic(path, bytes);
  } catch (const IoError& e) {
    throw ImageError(ImageError::Kind::io, e.what());
  }
}

/// Complex reconstructions are displayed through their magnitudes.
inline void save_image_signal(const Vec& x, int width, int height, const std::filesystem::path& path) {
  save_image_signal(RVec(x.cwiseAbs()), width, height, path);
}

}  // namespace phaseret

#endif  // PHASERET_DATASETS_IO_HPP
