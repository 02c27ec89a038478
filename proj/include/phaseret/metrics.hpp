#ifndef PHASERET_METRICS_HPP
#define PHASERET_METRICS_HPP

#include <cmath>

#include "phaseret/operators.hpp"
#include "phaseret/types.hpp"

namespace phaseret {

/// || |A x_hat| - b || / ||b||
inline double rel_measurement_error(const Instance& inst, const Vec& x_hat) {
  const double bn = inst.b().norm();
  if (!(bn > 0.0)) throw DegenerateInputError("relative measurement error undefined for b = 0");
  return (inst.op().forward(x_hat).cwiseAbs() - inst.b()).norm() / bn;
}

/// min_phi || x_true - e^{i phi} x_hat || / ||x_true||, with the optimal
/// phi = arg <x_hat, x_true>.
inline double phase_aligned_error(const Vec& x_true, const Vec& x_hat) {
  require(x_true.size() == x_hat.size(), "phase_aligned_error: length mismatch");
  const double tn = x_true.norm();
  if (!(tn > 0.0)) throw DegenerateInputError("phase-aligned error undefined for zero ground truth");
  const Complex c = inner(x_hat, x_true);
  const Complex rot = phase_of(c, Complex(1.0));
  return (x_true - rot * x_hat).norm() / tn;
}

/// |<v, x>| / (||v|| ||x||), the cosine between directions modulo global phase.
inline double alignment(const Vec& x_true, const Vec& v) {
  require(x_true.size() == v.size(), "alignment: length mismatch");
  const double d = x_true.norm() * v.norm();
  if (!(d > 0.0)) return 0.0;
  return std::abs(inner(v, x_true)) / d;
}

}  // namespace phaseret

#endif  // PHASERET_METRICS_HPP
