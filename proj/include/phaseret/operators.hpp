#ifndef PHASERET_OPERATORS_HPP
#define PHASERET_OPERATORS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "phaseret/types.hpp"

namespace phaseret {

/// Matrix-free linear map A : C^n -> C^m.
///
/// Row i is the vector a_i with (A x)_i = <a_i, x> = a_i^H x, so for a dense
/// matrix the row accessor returns the conjugate of the stored row. Instances
/// are immutable and cheap to copy; copies share the underlying callables.
class MeasurementOperator {
 public:
  using Map = std::function<Vec(const Vec&)>;
  using RowFn = std::function<Vec(Index)>;

  MeasurementOperator(Index n, Index m, Map forward, Map adjoint, RowFn rows = nullptr)
      : n_(n), m_(m), forward_(std::move(forward)), adjoint_(std::move(adjoint)), rows_(std::move(rows)) {
    require(n >= 1 && m >= 1, "operator dimensions must be positive");
    require(static_cast<bool>(forward_) && static_cast<bool>(adjoint_), "operator needs forward and adjoint maps");
  }

  Index n() const noexcept { return n_; }
  Index m() const noexcept { return m_; }
  bool has_rows() const noexcept { return static_cast<bool>(rows_); }

  Vec forward(const Vec& x) const {
    if (x.size() != n_)
      throw ArgumentError("forward: expected vector of length " + std::to_string(n_) + ", got " +
                          std::to_string(x.size()));
    return forward_(x);
  }

  Vec adjoint(const Vec& y) const {
    if (y.size() != m_)
      throw ArgumentError("adjoint: expected vector of length " + std::to_string(m_) + ", got " +
                          std::to_string(y.size()));
    return adjoint_(y);
  }

  /// a_i as a column vector. Throws if the operator has no row access.
  Vec row(Index i) const {
    if (!rows_) throw ArgumentError("operator does not provide row access");
    if (i < 0 || i >= m_) throw ArgumentError("row index out of range");
    return rows_(i);
  }

 private:
  Index n_;
  Index m_;
  Map forward_;
  Map adjoint_;
  RowFn rows_;
};

/// Operator backed by an explicit m x n matrix, with row access.
inline MeasurementOperator dense_operator(Mat a) {
  auto mat = std::make_shared<const Mat>(std::move(a));
  return MeasurementOperator(
      mat->cols(), mat->rows(), [mat](const Vec& x) -> Vec { return (*mat) * x; },
      [mat](const Vec& y) -> Vec { return mat->adjoint() * y; },
      [mat](Index i) -> Vec { return mat->row(i).adjoint(); });
}

/// A phase retrieval problem: operator, magnitudes b, optional ground truth.
class Instance {
 public:
  Instance(MeasurementOperator op, RVec b, std::optional<Vec> x_true = std::nullopt, std::string label = {})
      : op_(std::move(op)), b_(std::move(b)), x_true_(std::move(x_true)), label_(std::move(label)) {
    require(b_.size() == op_.m(), "measurement vector length does not match operator rows");
    for (Index i = 0; i < b_.size(); ++i)
      require(std::isfinite(b_[i]) && b_[i] >= 0.0, "measurements must be finite and nonnegative");
    if (x_true_) require(x_true_->size() == op_.n(), "ground truth length does not match operator columns");
  }

  const MeasurementOperator& op() const noexcept { return op_; }
  const RVec& b() const noexcept { return b_; }
  const std::optional<Vec>& x_true() const noexcept { return x_true_; }
  const std::string& label() const noexcept { return label_; }
  Index m() const noexcept { return op_.m(); }
  Index n() const noexcept { return op_.n(); }

 private:
  MeasurementOperator op_;
  RVec b_;
  std::optional<Vec> x_true_;
  std::string label_;
};

struct GaussianSpec {
  Index n = 1;
  Index m = 1;
  /// Per-entry complex variance; unset means 1/n.
  std::optional<double> variance;
  std::uint64_t seed = 0;
  /// Unset means noiseless.
  std::optional<double> snr_db;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline Vec complex_gaussian(Index n, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
  Vec v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = dist(rng);
    const double im = dist(rng);
    v[i] = Complex(re, im);
  }
  return v;
}

}  // namespace detail

/// max(b + w, 0) with w ~ N(0, ||b||^2 / (m 10^(snr/10))) i.i.d.
/// An infinite snr_db leaves b untouched.
inline RVec add_noise(const RVec& b, double snr_db, std::uint64_t seed) {
  require(!std::isnan(snr_db), "snr_db must not be NaN");
  if (std::isinf(snr_db) && snr_db > 0) return b;
  require(std::isfinite(snr_db), "snr_db must be finite or +inf");
  const auto m = static_cast<double>(b.size());
  const double variance = b.squaredNorm() / (m * std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  RVec out(b.size());
  for (Index i = 0; i < b.size(); ++i) out[i] = std::max(b[i] + dist(rng), 0.0);
  return out;
}

/// Dense i.i.d. circular complex Gaussian A and b = |A x_true| (plus optional
/// noise). Without x_true a unit-norm complex Gaussian signal is drawn after A.
inline Instance make_gaussian_instance(const GaussianSpec& spec, std::optional<Vec> x_true = std::nullopt) {
  require(spec.n >= 1 && spec.m >= 1, "gaussian instance needs n >= 1 and m >= 1");
  const double variance = spec.variance.value_or(1.0 / static_cast<double>(spec.n));
  require(variance > 0.0 && std::isfinite(variance), "gaussian variance must be positive");
  if (x_true) require(x_true->size() == spec.n, "x_true length must equal n");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
  Mat a(spec.m, spec.n);
  for (Index i = 0; i < spec.m; ++i)
    for (Index j = 0; j < spec.n; ++j) {
      const double re = dist(rng);
      const double im = dist(rng);
      a(i, j) = Complex(re, im);
    }

  Vec x;
  if (x_true) {
    x = *x_true;
  } else {
    x = detail::complex_gaussian(spec.n, 1.0, rng);
    x /= x.norm();
  }

  RVec b = (a * x).cwiseAbs();
  if (spec.snr_db) b = add_noise(b, *spec.snr_db, detail::splitmix64(spec.seed ^ 0x6E6F697365ull));

  std::string label = "gaussian n=" + std::to_string(spec.n) + " m=" + std::to_string(spec.m) +
                      " seed=" + std::to_string(spec.seed);
  return Instance(dense_operator(std::move(a)), std::move(b), std::move(x), std::move(label));
}

}  // namespace phaseret

#endif  // PHASERET_OPERATORS_HPP
