#ifndef PHASERET_SOLVERS_HPP
#define PHASERET_SOLVERS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseret/gradient_engine.hpp"
#include "phaseret/initializers.hpp"
#include "phaseret/operators.hpp"
#include "phaseret/types.hpp"

namespace phaseret {

/// Exponent and per-measurement weighting of F(x) = 1/2 sum w_i (|a_i^H x|^p - b_i^p)^2.
struct FamilySpec {
  enum class WeightRule { uniform, truncated, reweighted };

  int p = 2;
  WeightRule rule = WeightRule::uniform;
  /// truncated: keep i when b_i / |a_i^H x| lies in [1/alpha_h, alpha_l].
  /// Infinite bounds switch truncation off.
  double alpha_l = 5.0;
  double alpha_h = 5.0;
  /// reweighted: w_i = |a_i^H x| / (|a_i^H x| + eta b_i). eta = 0 switches it off.
  double eta = 0.1;

  static FamilySpec wf() { return {2, WeightRule::uniform}; }
  static FamilySpec af() { return {1, WeightRule::uniform}; }
  static FamilySpec twf(double alpha_l = 5.0, double alpha_h = 5.0) {
    return {2, WeightRule::truncated, alpha_l, alpha_h};
  }
  static FamilySpec taf(double alpha_l = 5.0, double alpha_h = 5.0) {
    return {1, WeightRule::truncated, alpha_l, alpha_h};
  }
  static FamilySpec rwf(double eta = 0.1) { return {2, WeightRule::reweighted, 5.0, 5.0, eta}; }
  static FamilySpec raf(double eta = 0.1) { return {1, WeightRule::reweighted, 5.0, 5.0, eta}; }
};

/// Weights in [0, 1] from the current magnitudes |Ax| and b.
inline RVec family_weights(const FamilySpec& spec, const RVec& mag, const RVec& b) {
  RVec w = RVec::Ones(mag.size());
  switch (spec.rule) {
    case FamilySpec::WeightRule::uniform: break;
    case FamilySpec::WeightRule::truncated: {
      if (std::isinf(spec.alpha_l) && std::isinf(spec.alpha_h)) break;
      const double lo = 1.0 / spec.alpha_h;
      const double hi = spec.alpha_l;
      for (Index i = 0; i < mag.size(); ++i) {
        double ratio;
        if (mag[i] > 0.0)
          ratio = b[i] / mag[i];
        else
          ratio = b[i] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        w[i] = (ratio >= lo && ratio <= hi) ? 1.0 : 0.0;
      }
      break;
    }
    case FamilySpec::WeightRule::reweighted: {
      if (spec.eta == 0.0) break;
      for (Index i = 0; i < mag.size(); ++i) {
        const double denom = mag[i] + spec.eta * b[i];
        w[i] = denom > 0.0 ? mag[i] / denom : 1.0;
      }
      break;
    }
  }
  return w;
}

/// Objective of the gradient-flow family. Iterate-dependent weights are held
/// in shared state and refreshed through Objective::prepare; uniform weights
/// leave prepare empty. When `weights_at` is given the weights start there.
inline Objective objective_for(const Instance& inst, const FamilySpec& spec,
                               const std::optional<Vec>& weights_at = std::nullopt) {
  require(spec.p == 1 || spec.p == 2, "family exponent p must be 1 or 2");
  require(spec.alpha_l > 0.0 && spec.alpha_h > 0.0 && spec.eta >= 0.0, "family weight parameters out of range");
  auto weights = std::make_shared<RVec>(RVec::Ones(inst.m()));
  const MeasurementOperator op = inst.op();
  const RVec b = inst.b();
  const int p = spec.p;
  const RVec bp = p == 2 ? RVec(b.cwiseAbs2()) : b;

  Objective obj;
  obj.value = [op, bp, p, weights](const Vec& x) {
    const Vec z = op.forward(x);
    double acc = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      const double mag = p == 2 ? std::norm(z[i]) : std::abs(z[i]);
      const double r = mag - bp[i];
      acc += (*weights)[i] * r * r;
    }
    return 0.5 * acc;
  };
  obj.gradient = [op, bp, p, weights](const Vec& x) {
    Vec z = op.forward(x);
    for (Index i = 0; i < z.size(); ++i) {
      const double w = (*weights)[i];
      if (p == 2) {
        z[i] *= 2.0 * w * (std::norm(z[i]) - bp[i]);
      } else {
        const double mag = std::abs(z[i]);
        z[i] = mag > 0.0 ? w * (mag - bp[i]) * (z[i] / mag) : Complex(0.0);
      }
    }
    return op.adjoint(z);
  };
  if (spec.rule != FamilySpec::WeightRule::uniform) {
    obj.prepare = [op, b, spec, weights](const Vec& x) {
      *weights = family_weights(spec, op.forward(x).cwiseAbs(), b);
    };
    if (weights_at) obj.prepare(*weights_at);
  }
  return obj;
}

struct SolveResult {
  Vec x_hat;
  Trace trace;
  std::string algorithm;
  std::string init_description;
  std::string diagnostics;
};

namespace detail {

inline void check_init(const Instance& inst, const InitResult& init) {
  if (init.x0.size() != inst.n())
    throw ArgumentError("initial point has length " + std::to_string(init.x0.size()) + ", expected " +
                        std::to_string(inst.n()));
}

inline double residual_norm(const Instance& inst, const Vec& x) {
  return (inst.op().forward(x).cwiseAbs() - inst.b()).norm();
}

}  // namespace detail

inline SolveResult solve_gradient_family(const Instance& inst, const FamilySpec& spec, const InitResult& init,
                                         const SolveOptions& opts = {}, std::string name = "gradient-family") {
  detail::check_init(inst, init);
  auto run = minimize(objective_for(inst, spec), init.x0, opts);
  return {std::move(run.x), std::move(run.trace), std::move(name), init.diagnostics, {}};
}

/// Settings of the least-squares subproblem min ||Ax - c|| used by the
/// projection methods (conjugate gradients on the normal equations).
struct LsqOptions {
  double tol = 1e-10;
  int max_iters = 200;
};

struct LsqResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
};

/// CG on A^H A x = A^H c, warm-started at x0. Stops when the normal-equation
/// residual drops below tol * ||A^H c||.
inline LsqResult solve_least_squares(const MeasurementOperator& op, const Vec& c, const Vec& x0,
                                     const LsqOptions& lsq = {}) {
  LsqResult out;
  out.x = x0;
  const Vec rhs = op.adjoint(c);
  const double target = lsq.tol * rhs.norm();
  Vec r = rhs - op.adjoint(op.forward(out.x));
  double rr = r.squaredNorm();
  if (std::sqrt(rr) <= target) {
    out.converged = true;
    return out;
  }
  Vec d = r;
  for (int it = 0; it < lsq.max_iters; ++it) {
    const Vec ad = op.forward(d);
    const double dad = ad.squaredNorm();
    if (!(dad > 0.0)) break;
    const double step = rr / dad;
    out.x += step * d;
    r -= step * op.adjoint(ad);
    const double rr_new = r.squaredNorm();
    out.iterations = it + 1;
    if (std::sqrt(rr_new) <= target) {
      out.converged = true;
      return out;
    }
    d = r + (rr_new / rr) * d;
    rr = rr_new;
  }
  return out;
}

namespace detail {

/// Shared loop of Gerchberg-Saxton (beta = 1) and relaxed-GS Fienup.
/// Convergence is measured on ||x_LS - x|| / max(||x||, ||x_LS||), the
/// distance to the projection, which is the iterate change when beta = 1.
inline SolveResult projection_loop(const Instance& inst, const InitResult& init, const SolveOptions& opts,
                                   double beta, const LsqOptions& lsq, std::string name) {
  check_init(inst, init);
  require(beta >= 0.0 && beta <= 1.0, "relaxation beta must lie in [0, 1]");
  require(opts.max_iters >= 0, "max_iters must be nonnegative");
  Stopwatch clock;
  const MeasurementOperator& op = inst.op();
  const RVec& b = inst.b();

  SolveResult out;
  out.algorithm = std::move(name);
  out.init_description = init.diagnostics;
  Vec x = init.x0;
  Trace& trace = out.trace;
  trace.status = Status::max_iters;
  if (opts.record_trace) trace.records.push_back({residual_norm(inst, x), 0.0, beta, 0, clock.seconds(), true});

  int lsq_failures = 0;
  int k = 0;
  for (; k < opts.max_iters; ++k) {
    if (opts.time_budget_s && clock.seconds() >= *opts.time_budget_s) break;
    Vec target = op.forward(x);
    for (Index i = 0; i < target.size(); ++i) target[i] = b[i] * phase_of(target[i], Complex(1.0));
    LsqResult ls = solve_least_squares(op, target, x, lsq);
    if (!ls.converged) ++lsq_failures;
    if (!all_finite(ls.x)) throw NumericError("least-squares update produced non-finite values", k + 1);

    const double denom = std::max(x.norm(), ls.x.norm());
    const double change = denom > 0.0 ? (ls.x - x).norm() / denom : 0.0;
    if (beta == 1.0)
      x = std::move(ls.x);
    else
      x += beta * (ls.x - x);
    if (opts.record_trace)
      trace.records.push_back({residual_norm(inst, x), change, beta, ls.iterations, clock.seconds(), true});
    if (change <= opts.tol) {
      trace.status = Status::converged;
      ++k;
      break;
    }
  }
  trace.iterations = k;
  if (lsq_failures > 0)
    out.diagnostics = "least-squares subsolver hit its iteration cap " + std::to_string(lsq_failures) + " times";
  out.x_hat = std::move(x);
  return out;
}

}  // namespace detail

/// Alternate c = phase(Ax) (phase(0) := 1) with x = argmin ||Ax - b .* c||.
inline SolveResult solve_gerchberg_saxton(const Instance& inst, const InitResult& init,
                                          const SolveOptions& opts = {}, const LsqOptions& lsq = {}) {
  return detail::projection_loop(inst, init, opts, 1.0, lsq, "gs");
}

/// Relaxed Gerchberg-Saxton: x <- x + beta (x_LS - x). beta = 1 is exactly GS.
inline SolveResult solve_fienup(const Instance& inst, const InitResult& init, const SolveOptions& opts = {},
                                double beta = 0.9, const LsqOptions& lsq = {}) {
  return detail::projection_loop(inst, init, opts, beta, lsq, "fienup");
}

/// Randomized Kaczmarz on the phase-completed system: each sweep visits all
/// rows in a seeded random order and projects x onto |<a_i, x>| = b_i.
inline SolveResult solve_kaczmarz(const Instance& inst, const InitResult& init, const SolveOptions& opts = {}) {
  detail::check_init(inst, init);
  require(inst.op().has_rows(), "kaczmarz needs row access");
  require(opts.max_iters >= 0, "max_iters must be nonnegative");
  detail::Stopwatch clock;
  const Index m = inst.m();
  const RVec& b = inst.b();

  // Row i of `rows` is a_i^H, so rows.row(i) * x = <a_i, x>.
  Mat rows(m, inst.n());
  RVec sq(m);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const Vec a = inst.op().row(i);
    rows.row(i) = a.adjoint();
    sq[i] = a.squaredNorm();
    if (sq[i] > 0.0) order.push_back(i);
  }

  SolveResult out;
  out.algorithm = "kaczmarz";
  out.init_description = init.diagnostics;
  if (static_cast<Index>(order.size()) < m)
    out.diagnostics = "skipped " + std::to_string(m - static_cast<Index>(order.size())) + " zero rows";

  std::mt19937_64 rng(opts.seed);
  Vec x = init.x0;
  Trace& trace = out.trace;
  trace.status = Status::max_iters;
  if (opts.record_trace) trace.records.push_back({detail::residual_norm(inst, x), 0.0, 1.0, 0, clock.seconds(), true});

  int k = 0;
  for (; k < opts.max_iters; ++k) {
    if (opts.time_budget_s && clock.seconds() >= *opts.time_budget_s) break;
    const Vec previous = x;
    std::shuffle(order.begin(), order.end(), rng);
    for (Index i : order) {
      const Complex z = (rows.row(i) * x).value();
      const Complex coeff = (b[i] * phase_of(z, Complex(1.0)) - z) / sq[i];
      x.noalias() += coeff * rows.row(i).adjoint();
    }
    if (!all_finite(x)) throw NumericError("kaczmarz sweep produced non-finite values", k + 1);
    const double denom = std::max(previous.norm(), x.norm());
    const double change = denom > 0.0 ? (x - previous).norm() / denom : 0.0;
    if (opts.record_trace)
      trace.records.push_back({detail::residual_norm(inst, x), change, 1.0, 0, clock.seconds(), true});
    if (change <= opts.tol) {
      trace.status = Status::converged;
      ++k;
      break;
    }
  }
  trace.iterations = k;
  out.x_hat = std::move(x);
  return out;
}

struct PhaseMaxOptions {
  double penalty_growth = 10.0;
  /// Penalty rounds stop early once the largest violation max(|a_i^H x| - b_i, 0)
  /// falls to violation_tol * max(b).
  int max_rounds = 10;
  double violation_tol = 1e-7;
};

/// max_i (|a_i^H x| - b_i)_+
inline double max_violation(const Instance& inst, const Vec& x) {
  const RVec mag = inst.op().forward(x).cwiseAbs();
  double worst = 0.0;
  for (Index i = 0; i < mag.size(); ++i) worst = std::max(worst, mag[i] - inst.b()[i]);
  return worst;
}

/// PhaseMax as a penalty program: minimise
///   -Re<anchor, x> + lambda sum_i max(|a_i^H x| - b_i, 0)^2
/// with lambda = 1/||b|| growing geometrically between warm-started rounds.
/// Each round gets the full opts.max_iters budget.
inline SolveResult solve_phasemax(const Instance& inst, const InitResult& init, const SolveOptions& opts = {},
                                  const PhaseMaxOptions& pm = {}) {
  detail::check_init(inst, init);
  require(pm.penalty_growth > 1.0, "penalty_growth must exceed 1");
  require(pm.max_rounds >= 1, "phasemax needs at least one penalty round");
  const Vec anchor = init.x0;
  if (!(anchor.norm() > 0.0)) throw ArgumentError("phasemax needs a nonzero anchor");

  const MeasurementOperator op = inst.op();
  const RVec b = inst.b();
  const double bnorm = b.norm();
  const double bmax = b.size() > 0 ? b.maxCoeff() : 0.0;
  auto lambda = std::make_shared<double>(bnorm > 0.0 ? 1.0 / bnorm : 1.0);

  Objective obj;
  obj.value = [op, b, anchor, lambda](const Vec& x) {
    const Vec z = op.forward(x);
    double pen = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      const double v = std::max(std::abs(z[i]) - b[i], 0.0);
      pen += v * v;
    }
    return -inner(anchor, x).real() + *lambda * pen;
  };
  obj.gradient = [op, b, anchor, lambda](const Vec& x) {
    Vec z = op.forward(x);
    for (Index i = 0; i < z.size(); ++i) {
      const double mag = std::abs(z[i]);
      const double v = std::max(mag - b[i], 0.0);
      z[i] = v > 0.0 ? (2.0 * *lambda * v / mag) * z[i] : Complex(0.0);
    }
    return Vec(op.adjoint(z) - anchor);
  };

  SolveResult out;
  out.algorithm = "phasemax";
  out.init_description = init.diagnostics;
  Vec x = anchor;
  int total = 0;
  int rounds = 0;
  Status last = Status::max_iters;
  for (; rounds < pm.max_rounds; ++rounds) {
    auto run = minimize(obj, x, opts);
    x = std::move(run.x);
    total += run.trace.iterations;
    last = run.trace.status;
    auto& recs = out.trace.records;
    const auto skip = recs.empty() ? 0 : 1;
    recs.insert(recs.end(), run.trace.records.begin() + std::min<std::ptrdiff_t>(skip, run.trace.records.size()),
                run.trace.records.end());
    if (max_violation(inst, x) <= pm.violation_tol * bmax) {
      ++rounds;
      break;
    }
    *lambda *= pm.penalty_growth;
  }
  out.trace.iterations = total;
  out.trace.status = last;
  out.diagnostics = "penalty rounds=" + std::to_string(rounds) + " max violation=" + std::to_string(max_violation(inst, x));
  out.x_hat = std::move(x);
  return out;
}

/// Tunables for the catalog entries, with the documented defaults.
struct AlgorithmParams {
  double fienup_beta = 0.9;
  double alpha_l = 5.0;
  double alpha_h = 5.0;
  double eta = 0.1;
  PhaseMaxOptions phasemax;
  LsqOptions lsq;
};

inline const std::array<std::string_view, 10>& algorithm_names() {
  static const std::array<std::string_view, 10> names{"gs",  "fienup", "wf",  "twf",      "rwf",
                                                      "af",  "taf",    "raf", "kaczmarz", "phasemax"};
  return names;
}

inline bool is_algorithm_name(std::string_view s) {
  const auto& names = algorithm_names();
  return std::find(names.begin(), names.end(), s) != names.end();
}

inline std::string valid_algorithm_list() {
  std::string out;
  for (auto n : algorithm_names()) out += (out.empty() ? "" : ", ") + std::string(n);
  return out;
}

/// Dispatch by stable algorithm name.
inline SolveResult solve(std::string_view name, const Instance& inst, const InitResult& init,
                         const SolveOptions& opts = {}, const AlgorithmParams& params = {}) {
  const std::string n(name);
  if (name == "gs") return solve_gerchberg_saxton(inst, init, opts, params.lsq);
  if (name == "fienup") return solve_fienup(inst, init, opts, params.fienup_beta, params.lsq);
  if (name == "wf") return solve_gradient_family(inst, FamilySpec::wf(), init, opts, n);
  if (name == "af") return solve_gradient_family(inst, FamilySpec::af(), init, opts, n);
  if (name == "twf") return solve_gradient_family(inst, FamilySpec::twf(params.alpha_l, params.alpha_h), init, opts, n);
  if (name == "taf") return solve_gradient_family(inst, FamilySpec::taf(params.alpha_l, params.alpha_h), init, opts, n);
  if (name == "rwf") return solve_gradient_family(inst, FamilySpec::rwf(params.eta), init, opts, n);
  if (name == "raf") return solve_gradient_family(inst, FamilySpec::raf(params.eta), init, opts, n);
  if (name == "kaczmarz") return solve_kaczmarz(inst, init, opts);
  if (name == "phasemax") return solve_phasemax(inst, init, opts, params.phasemax);
  throw ArgumentError("unknown algorithm '" + n + "' (valid: " + valid_algorithm_list() + ")");
}

}  // namespace phaseret

#endif  // PHASERET_SOLVERS_HPP
