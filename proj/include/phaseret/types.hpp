#ifndef PHASERET_TYPES_HPP
#define PHASERET_TYPES_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace phaseret {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Bad dimensions, out-of-range options, unknown names.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that makes an operation ill-posed (zero measurement vector, etc).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// NaN or Inf produced during an iteration.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int iteration)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// <u, v> = sum conj(u_i) v_i.
inline Complex inner(const Vec& u, const Vec& v) { return u.dot(v); }

/// z / |z|, with the value at zero chosen by the caller.
inline Complex phase_of(Complex z, Complex at_zero) {
  const double r = std::abs(z);
  return r > 0.0 ? z / r : at_zero;
}

inline Vec phase_of(const Vec& z, Complex at_zero) {
  Vec out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = phase_of(z[i], at_zero);
  return out;
}

inline bool all_finite(const Vec& v) {
  for (Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  return true;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

}  // namespace phaseret

#endif  // PHASERET_TYPES_HPP
