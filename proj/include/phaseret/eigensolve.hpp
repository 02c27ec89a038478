#ifndef PHASERET_EIGENSOLVE_HPP
#define PHASERET_EIGENSOLVE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "phaseret/operators.hpp"
#include "phaseret/types.hpp"

namespace phaseret {

/// A Hermitian linear map available only through matrix-vector products.
struct HermitianOp {
  Index dim = 0;
  std::function<Vec(const Vec&)> apply;
};

struct EigOptions {
  /// Relative residual target: ||Yv - lambda v|| <= tol * max(|lambda|, 1).
  double tol = 1e-8;
  int max_restarts = 100;
  /// Krylov basis size; unset means min(20, n).
  std::optional<Index> subspace_dim;
  std::uint64_t seed = 0;
};

struct EigResult {
  double value = 0.0;
  Vec vector;
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
  int restarts = 0;
  int matvecs = 0;
  /// Target Ritz value after each Rayleigh-Ritz step.
  std::vector<double> ritz_history;
  std::string note;
};

namespace detail {

/// Two passes of classical Gram-Schmidt against the first `cols` columns.
inline void orthogonalize(Vec& w, const Mat& basis, Index cols) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec coeffs = basis.leftCols(cols).adjoint() * w;
    w.noalias() -= basis.leftCols(cols) * coeffs;
  }
}

inline Index resolve_subspace_dim(const EigOptions& opts, Index n) {
  require(opts.tol > 0.0, "eigensolver tolerance must be positive");
  require(opts.max_restarts >= 0, "max_restarts must be nonnegative");
  if (n == 1) return 1;
  const Index k = opts.subspace_dim.value_or(std::min<Index>(20, n));
  require(k >= 2 && k <= n, "subspace_dim must satisfy 2 <= subspace_dim <= n");
  return k;
}

#ifndef NDEBUG
inline void spot_check_hermitian(const HermitianOp& op, std::mt19937_64& rng) {
  const Vec u = complex_gaussian(op.dim, 1.0, rng);
  const Vec v = complex_gaussian(op.dim, 1.0, rng);
  const Vec yu = op.apply(u);
  const Vec yv = op.apply(v);
  const double gap = std::abs(inner(yu, v) - inner(u, yv));
  const double scale = std::max({yu.norm() * v.norm(), u.norm() * yv.norm(), 1e-300});
  if (gap > 1e-8 * scale) throw ArgumentError("eigensolver operator is not Hermitian");
}
#endif

/// Thick-restart Lanczos for the algebraically largest eigenpair.
///
/// The basis is fully reorthogonalized and the projected matrix V^H Y V is
/// formed explicitly from stored products, so restarts keep the leading Ritz
/// vectors without extra matvecs. `scale(theta)` is the residual normaliser.
template <class Scale>
EigResult lanczos_largest(const HermitianOp& op, const EigOptions& opts, Scale scale) {
  require(op.dim >= 1 && static_cast<bool>(op.apply), "eigensolver needs a nonempty operator");
  const Index n = op.dim;
  const Index k = resolve_subspace_dim(opts, n);
  const Index keep = std::max<Index>(1, std::min<Index>(k - 2, k / 2));

  std::mt19937_64 rng(opts.seed);
#ifndef NDEBUG
  spot_check_hermitian(op, rng);
#endif

  EigResult result;
  Mat basis(n, k);
  Mat images(n, k);
  Index cols = 0;

  auto apply = [&](const Vec& v) {
    ++result.matvecs;
    Vec y = op.apply(v);
    if (y.size() != n) throw ArgumentError("eigensolver operator returned wrong dimension");
    return y;
  };

  // Random unit vector orthogonal to the current basis; false if none exists.
  auto random_direction = [&](Vec& out) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      out = complex_gaussian(n, 1.0, rng);
      orthogonalize(out, basis, cols);
      const double nrm = out.norm();
      if (nrm > 1e-8) {
        out /= nrm;
        return true;
      }
    }
    return false;
  };

  auto push = [&](const Vec& v) {
    basis.col(cols) = v;
    images.col(cols) = apply(v);
    ++cols;
  };

  {
    Vec start;
    random_direction(start);
    push(start);
  }

  double best_value = -std::numeric_limits<double>::infinity();
  for (int restart = 0;; ++restart) {
    while (cols < k) {
      Vec w = images.col(cols - 1);
      const double before = w.norm();
      orthogonalize(w, basis, cols);
      const double after = w.norm();
      if (after > 1e-10 * before && after > 0.0) {
        w /= after;
      } else if (!random_direction(w)) {
        break;
      }
      push(w);
    }

    Mat projected = basis.leftCols(cols).adjoint() * images.leftCols(cols);
    projected = (0.5 * (projected + projected.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat> small(projected);
    const double theta = small.eigenvalues()[cols - 1];
    const Vec s = small.eigenvectors().col(cols - 1);
    Vec u = basis.leftCols(cols) * s;
    Vec yu = images.leftCols(cols) * s;
    const double unorm = u.norm();
    u /= unorm;
    yu /= unorm;
    double residual = (yu - theta * u).norm();
    result.ritz_history.push_back(theta);

    bool refreshed = false;
    if (residual <= opts.tol * scale(theta)) {
      // Stored images drift slowly across restarts; confirm against the operator.
      yu = apply(u);
      residual = (yu - theta * u).norm();
      refreshed = true;
      if (residual <= opts.tol * scale(theta)) {
        result.value = theta;
        result.vector = u;
        result.residual = residual;
        result.converged = true;
        result.restarts = restart;
        return result;
      }
    }
    if (theta >= best_value) {
      best_value = theta;
      result.value = theta;
      result.vector = u;
      result.residual = residual;
    }
    if (restart >= opts.max_restarts) {
      result.restarts = restart;
      result.note = "eigensolver did not converge after " + std::to_string(restart) + " restarts";
      return result;
    }

    if (refreshed) {
      basis.col(0) = u;
      images.col(0) = yu;
      cols = 1;
      continue;
    }
    // Keep the leading Ritz vectors, target last so expansion continues from it.
    const Index p = std::min<Index>(keep, cols);
    const Mat ritz = small.eigenvectors().rightCols(p);
    const Mat kept_basis = basis.leftCols(cols) * ritz;
    const Mat kept_images = images.leftCols(cols) * ritz;
    basis.leftCols(p) = kept_basis;
    images.leftCols(p) = kept_images;
    cols = p;
  }
}

}  // namespace detail

/// Largest (algebraic) eigenpair of a Hermitian operator.
inline EigResult largest_eigenpair(const HermitianOp& op, const EigOptions& opts = {}) {
  return detail::lanczos_largest(op, opts, [](double theta) { return std::max(std::abs(theta), 1.0); });
}

/// Smallest eigenpair via the largest eigenpair of sigma I - Y, where sigma is
/// the largest eigenvalue of Y from a preliminary solve.
inline EigResult smallest_eigenpair(const HermitianOp& op, const EigOptions& opts = {}) {
  EigResult bound = largest_eigenpair(op, opts);
  if (!bound.converged) {
    bound.note = "spectral bound failed: " + bound.note;
    return bound;
  }
  const double sigma = bound.value;
  HermitianOp shifted{op.dim, [&op, sigma](const Vec& v) -> Vec { return sigma * v - op.apply(v); }};
  EigOptions shifted_opts = opts;
  shifted_opts.seed = detail::splitmix64(opts.seed);
  EigResult r = detail::lanczos_largest(shifted, shifted_opts, [sigma](double mu) {
    return std::max(std::abs(sigma - mu), 1.0);
  });
  r.value = sigma - r.value;
  for (double& h : r.ritz_history) h = sigma - h;
  r.matvecs += bound.matvecs;
  return r;
}

}  // namespace phaseret

#endif  // PHASERET_EIGENSOLVE_HPP
