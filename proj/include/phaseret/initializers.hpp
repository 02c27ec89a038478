#ifndef PHASERET_INITIALIZERS_HPP
#define PHASERET_INITIALIZERS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseret/eigensolve.hpp"
#include "phaseret/operators.hpp"
#include "phaseret/types.hpp"

namespace phaseret {

/// How b is normalised before pre-processing.
///   none:             b unchanged
///   paper:            m b / ||b||      (mean square m)
///   unit_mean_square: sqrt(m) b / ||b|| (mean square 1, the Gaussian model)
enum class RescaleMode { none, paper, unit_mean_square };

inline std::string_view to_string(RescaleMode mode) {
  switch (mode) {
    case RescaleMode::none: return "none";
    case RescaleMode::paper: return "paper";
    case RescaleMode::unit_mean_square: return "unit_mean_square";
  }
  return "?";
}

inline RescaleMode parse_rescale_mode(std::string_view s) {
  if (s == "none") return RescaleMode::none;
  if (s == "paper") return RescaleMode::paper;
  if (s == "unit_mean_square" || s == "ums") return RescaleMode::unit_mean_square;
  throw ArgumentError("unknown rescale mode '" + std::string(s) + "' (valid: none, paper, unit_mean_square)");
}

inline RVec rescale_measurements(const RVec& b, RescaleMode mode = RescaleMode::unit_mean_square) {
  const double nrm = b.norm();
  if (!(nrm > 0.0)) throw DegenerateInputError("cannot rescale an all-zero measurement vector");
  const auto m = static_cast<double>(b.size());
  switch (mode) {
    case RescaleMode::none: return b;
    case RescaleMode::paper: return (m / nrm) * b;
    case RescaleMode::unit_mean_square: return (std::sqrt(m) / nrm) * b;
  }
  return b;
}

/// Scalar weighting T(z) of squared (rescaled) measurements z = b_i^2.
///
/// truncated: z * [z <= gamma * mean(z)]  (heavy tail above the cut is zeroed)
/// weighted:  1 - exp(-z / (shrink * mean(z)))
/// optimal:   (z - 1) / (z + sqrt(delta) - 1), clamped to [-50, 50]
struct PreprocessFn {
  enum class Kind { identity, truncated, weighted, optimal };

  static constexpr double kOptimalClamp = 50.0;

  Kind kind = Kind::identity;
  double param = 0.0;

  static PreprocessFn identity() { return {Kind::identity, 0.0}; }
  static PreprocessFn truncated(double gamma = 1.5) {
    require(gamma > 0.0, "truncation threshold must be positive");
    return {Kind::truncated, gamma};
  }
  static PreprocessFn weighted(double shrink = 1.0) {
    require(shrink > 0.0, "shrink parameter must be positive");
    return {Kind::weighted, shrink};
  }
  static PreprocessFn optimal(double delta) {
    require(delta > 0.0, "optimal pre-processing needs delta > 0");
    return {Kind::optimal, delta};
  }

  std::string describe() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::truncated: return "truncated(gamma=" + std::to_string(param) + ")";
      case Kind::weighted: return "weighted(shrink=" + std::to_string(param) + ")";
      case Kind::optimal: return "optimal(delta=" + std::to_string(param) + ")";
    }
    return "?";
  }
};

/// T(z). `batch_mean` is the mean of z over all measurements and is only
/// read by the truncated and weighted variants.
inline double preprocess(const PreprocessFn& fn, double z, double batch_mean = 1.0) {
  switch (fn.kind) {
    case PreprocessFn::Kind::identity: return z;
    case PreprocessFn::Kind::truncated: return z <= fn.param * batch_mean ? z : 0.0;
    case PreprocessFn::Kind::weighted:
      return batch_mean > 0.0 ? 1.0 - std::exp(-z / (fn.param * batch_mean)) : 0.0;
    case PreprocessFn::Kind::optimal: {
      const double denom = z + std::sqrt(fn.param) - 1.0;
      const double t = (z - 1.0) / denom;
      if (std::isnan(t)) return 0.0;
      return std::clamp(t, -PreprocessFn::kOptimalClamp, PreprocessFn::kOptimalClamp);
    }
  }
  return z;
}

inline RVec preprocess(const PreprocessFn& fn, const RVec& z) {
  const double mean = z.size() > 0 ? z.mean() : 0.0;
  RVec out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = preprocess(fn, z[i], mean);
  return out;
}

/// Y = (1/m) sum_i T(bt_i^2) a_i a_i^H applied as (1/m) A^H (w .* (A v)).
inline HermitianOp build_spectral_op(const Instance& inst, const PreprocessFn& fn,
                                     RescaleMode mode = RescaleMode::unit_mean_square) {
  const RVec scaled = rescale_measurements(inst.b(), mode);
  const RVec weights = preprocess(fn, RVec(scaled.cwiseAbs2()));
  const double inv_m = 1.0 / static_cast<double>(inst.m());
  return HermitianOp{inst.n(), [op = inst.op(), weights, inv_m](const Vec& v) -> Vec {
                       Vec av = op.forward(v);
                       for (Index i = 0; i < av.size(); ++i) av[i] *= weights[i];
                       return inv_m * op.adjoint(av);
                     }};
}

struct InitResult {
  Vec x0;
  Vec raw_direction;
  double alpha = 0.0;
  double eig_value = 0.0;
  bool eig_converged = true;
  std::string diagnostics;
};

struct ScaledInit {
  double alpha;
  Vec x0;
};

/// Closed-form minimiser of || alpha |A xhat| - b || over alpha.
inline ScaledInit scale_initializer(const Vec& xhat, const Instance& inst) {
  const RVec mag = inst.op().forward(xhat).cwiseAbs();
  const double denom = mag.squaredNorm();
  if (!(denom > 0.0)) throw DegenerateInputError("|A xhat| is identically zero; cannot calibrate length");
  const double alpha = mag.dot(inst.b()) / denom;
  return {alpha, alpha * xhat};
}

namespace detail {

inline InitResult finish_init(const Instance& inst, const EigResult& eig, std::string diag) {
  InitResult r;
  r.raw_direction = eig.vector;
  r.eig_value = eig.value;
  r.eig_converged = eig.converged;
  auto scaled = scale_initializer(r.raw_direction, inst);
  r.alpha = scaled.alpha;
  r.x0 = std::move(scaled.x0);
  if (!eig.converged) diag += (diag.empty() ? "" : "; ") + eig.note;
  r.diagnostics = std::move(diag);
  return r;
}

}  // namespace detail

inline InitResult spectral_init(const Instance& inst, const PreprocessFn& fn, const EigOptions& opts = {},
                                RescaleMode mode = RescaleMode::unit_mean_square) {
  const EigResult eig = largest_eigenpair(build_spectral_op(inst, fn, mode), opts);
  return detail::finish_init(inst, eig,
                             "spectral " + fn.describe() + " rescale=" + std::string(to_string(mode)));
}

/// Indices of the `count` smallest entries of b; ties go to the lower index.
inline std::vector<Index> select_smallest(const RVec& b, Index count) {
  std::vector<Index> idx(static_cast<std::size_t>(b.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&b](Index a, Index c) { return b[a] < b[c]; });
  idx.resize(static_cast<std::size_t>(std::min<Index>(count, b.size())));
  return idx;
}

/// Smallest eigenvector of the normalised covariance of the rows that
/// produce the ceil(fraction m) smallest measurements.
inline InitResult orthogonality_promoting_init(const Instance& inst, double fraction = 0.5,
                                               const EigOptions& opts = {}) {
  require(fraction > 0.0 && fraction < 1.0, "fraction must lie in (0, 1)");
  require(inst.op().has_rows(), "orthogonality-promoting init needs row access");
  const auto count = static_cast<Index>(std::ceil(fraction * static_cast<double>(inst.m())));
  if (count < 1) throw ArgumentError("fraction selects no measurements");

  const auto chosen = select_smallest(inst.b(), count);
  Mat rows(static_cast<Index>(chosen.size()), inst.n());
  Index used = 0;
  Index skipped = 0;
  for (Index i : chosen) {
    const Vec a = inst.op().row(i);
    const double nrm = a.norm();
    if (!(nrm > 0.0)) {
      ++skipped;
      continue;
    }
    rows.row(used++) = a.adjoint() / nrm;
  }
  if (used == 0) throw DegenerateInputError("all selected measurement rows are zero");
  rows.conservativeResize(used, Eigen::NoChange);

  const double inv = 1.0 / static_cast<double>(used);
  HermitianOp y{inst.n(), [r = std::move(rows), inv](const Vec& v) -> Vec {
                  return inv * (r.adjoint() * (r * v));
                }};
  std::string diag = "orthogonality-promoting |I|=" + std::to_string(used);
  if (skipped > 0) diag += ", skipped " + std::to_string(skipped) + " zero rows";
  return detail::finish_init(inst, smallest_eigenpair(y, opts), std::move(diag));
}

/// Seeded random direction, length-calibrated. A baseline, not a real initializer.
inline InitResult random_init(const Instance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vec v = detail::complex_gaussian(inst.n(), 1.0, rng);
  v /= v.norm();
  EigResult fake;
  fake.vector = std::move(v);
  fake.converged = true;
  return detail::finish_init(inst, fake, "random");
}

/// Named initializer configuration shared by the CLI and the benchmark.
struct InitializerSpec {
  std::string name = "spectral-optimal";
  RescaleMode rescale = RescaleMode::unit_mean_square;
  double fraction = 0.5;
  double gamma = 1.5;
  double shrink = 1.0;
};

inline const std::array<std::string_view, 6>& initializer_names() {
  static const std::array<std::string_view, 6> names{"spectral-identity", "spectral-truncated", "spectral-weighted",
                                                     "spectral-optimal",  "orthogonality",      "random"};
  return names;
}

inline bool is_initializer_name(std::string_view s) {
  const auto& names = initializer_names();
  return std::find(names.begin(), names.end(), s) != names.end();
}

inline InitResult run_initializer(const Instance& inst, const InitializerSpec& spec, const EigOptions& opts = {}) {
  const double delta = static_cast<double>(inst.m()) / static_cast<double>(inst.n());
  if (spec.name == "spectral-identity") return spectral_init(inst, PreprocessFn::identity(), opts, spec.rescale);
  if (spec.name == "spectral-truncated")
    return spectral_init(inst, PreprocessFn::truncated(spec.gamma), opts, spec.rescale);
  if (spec.name == "spectral-weighted")
    return spectral_init(inst, PreprocessFn::weighted(spec.shrink), opts, spec.rescale);
  if (spec.name == "spectral-optimal") return spectral_init(inst, PreprocessFn::optimal(delta), opts, spec.rescale);
  if (spec.name == "orthogonality") return orthogonality_promoting_init(inst, spec.fraction, opts);
  if (spec.name == "random") return random_init(inst, opts.seed);
  std::string valid;
  for (auto n : initializer_names()) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw ArgumentError("unknown initializer '" + spec.name + "' (valid: " + valid + ")");
}

}  // namespace phaseret

#endif  // PHASERET_INITIALIZERS_HPP
