#ifndef PHASERET_GRADIENT_ENGINE_HPP
#define PHASERET_GRADIENT_ENGINE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "phaseret/types.hpp"

namespace phaseret {

/// Real-valued objective of a complex vector. `gradient` follows the
/// Wirtinger convention 2 df/d(conj x), which equals the real gradient on
/// R^{2n} packed as (d/d Re) + i (d/d Im).
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  /// Optional hook run on every new iterate before value/gradient are taken
  /// there. Solvers with iterate-dependent weights refresh them here.
  std::function<void(const Vec&)> prepare;
};

enum class StepRule {
  bb_nonmonotone,  ///< Barzilai-Borwein stepsize with windowed backtracking.
  fixed,           ///< Constant tau0, every step taken.
};

struct SolveOptions {
  /// Stop when ||grad|| / max(||x||, 1) <= tol (relative change for the
  /// projection methods).
  double tol = 1e-7;
  int max_iters = 1000;
  int window_w = 10;
  /// Unset: 10 / ||grad f(x0)|| * max(||x0||, 1).
  std::optional<double> tau0;
  double backtrack_beta = 0.5;
  int max_backtracks = 30;
  bool record_trace = true;
  StepRule step_rule = StepRule::bb_nonmonotone;
  std::uint64_t seed = 0;
  /// Wall-clock budget checked between iterations.
  std::optional<double> time_budget_s;
};

enum class Status { converged, max_iters, stalled, error };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::max_iters: return "max_iters";
    case Status::stalled: return "stalled";
    case Status::error: return "error";
  }
  return "?";
}

struct IterationRecord {
  double objective = 0.0;
  double grad_norm = 0.0;
  double stepsize = 0.0;
  int backtracks = 0;
  double time_s = 0.0;
  /// False when backtracking ran out and the best candidate was taken.
  bool accepted = true;
};

struct Trace {
  std::vector<IterationRecord> records;
  Status status = Status::max_iters;
  int iterations = 0;
};

struct MinimizeResult {
  Vec x;
  Trace trace;
};

/// <dx, dx> / Re<dx, dg>, or nullopt when the curvature estimate is not positive.
inline std::optional<double> bb_stepsize(const Vec& dx, const Vec& dg) {
  const double num = dx.squaredNorm();
  const double den = inner(dx, dg).real();
  if (!(den > 0.0) || !(num > 0.0)) return std::nullopt;
  const double tau = num / den;
  if (!std::isfinite(tau)) return std::nullopt;
  return tau;
}

/// f_new < max(history) - 1e-12 max(1, |max(history)|).
inline bool nonmonotone_accept(double f_new, std::span<const double> history) {
  require(!history.empty(), "nonmonotone_accept needs a nonempty history");
  const double ref = *std::max_element(history.begin(), history.end());
  const double slack = 1e-12 * std::max(1.0, std::abs(ref));
  return f_new < ref - slack;
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void validate(const SolveOptions& opts) {
  require(opts.window_w >= 1, "window_w must be >= 1");
  require(opts.backtrack_beta > 0.0 && opts.backtrack_beta < 1.0, "backtrack_beta must lie in (0, 1)");
  require(opts.max_iters >= 0, "max_iters must be nonnegative");
  require(opts.max_backtracks >= 0, "max_backtracks must be nonnegative");
  require(opts.tol >= 0.0, "tol must be nonnegative");
  if (opts.tau0) require(*opts.tau0 > 0.0 && std::isfinite(*opts.tau0), "tau0 must be positive");
}

}  // namespace detail

/// Gradient descent x <- x - tau grad f(x) with Barzilai-Borwein stepsizes
/// and non-monotone backtracking against the max of the last w objectives.
inline MinimizeResult minimize(const Objective& obj, const Vec& x0, const SolveOptions& opts = {}) {
  detail::validate(opts);
  detail::Stopwatch clock;

  Vec x = x0;
  if (obj.prepare) obj.prepare(x);
  double f = obj.value(x);
  Vec g = obj.gradient(x);
  if (!std::isfinite(f) || !all_finite(g)) throw NumericError("non-finite objective or gradient", 0);

  double gnorm = g.norm();
  double tau = opts.tau0 ? *opts.tau0 : (gnorm > 0.0 ? 10.0 / gnorm * std::max(x.norm(), 1.0) : 1.0);

  MinimizeResult out;
  Trace& trace = out.trace;
  std::deque<double> window{f};
  std::vector<double> window_buf;
  if (opts.record_trace) trace.records.push_back({f, gnorm, 0.0, 0, clock.seconds(), true});

  trace.status = Status::max_iters;
  int k = 0;
  for (; k < opts.max_iters; ++k) {
    if (gnorm / std::max(x.norm(), 1.0) <= opts.tol) {
      trace.status = Status::converged;
      break;
    }
    if (opts.time_budget_s && clock.seconds() >= *opts.time_budget_s) break;

    double t = tau;
    Vec candidate;
    double f_candidate = std::numeric_limits<double>::infinity();
    int backtracks = 0;
    bool accepted = true;

    if (opts.step_rule == StepRule::fixed) {
      candidate = x - t * g;
      f_candidate = obj.value(candidate);
      if (!std::isfinite(f_candidate)) throw NumericError("objective diverged under fixed stepsize", k + 1);
    } else {
      window_buf.assign(window.begin(), window.end());
      Vec best;
      double best_f = std::numeric_limits<double>::infinity();
      double best_t = t;
      accepted = false;
      for (;;) {
        Vec trial = x - t * g;
        const double ft = obj.value(trial);
        if (ft < best_f) {  // false for NaN
          best_f = ft;
          best = trial;
          best_t = t;
        }
        if (std::isfinite(ft) && nonmonotone_accept(ft, window_buf)) {
          accepted = true;
          break;
        }
        if (backtracks == opts.max_backtracks) break;
        t *= opts.backtrack_beta;
        ++backtracks;
      }
      if (!accepted) {
        if (!std::isfinite(best_f)) throw NumericError("objective non-finite at every backtracking trial", k + 1);
        if (!(best_f < f)) {
          trace.status = Status::stalled;
          break;
        }
        t = best_t;
      }
      candidate = std::move(best);
      f_candidate = best_f;
    }

    if (obj.prepare) {
      obj.prepare(candidate);
      f_candidate = obj.value(candidate);
    }
    Vec g_new = obj.gradient(candidate);
    if (!std::isfinite(f_candidate) || !all_finite(g_new))
      throw NumericError("non-finite objective or gradient", k + 1);

    if (opts.step_rule == StepRule::bb_nonmonotone) {
      const auto bb = bb_stepsize(candidate - x, g_new - g);
      tau = bb.value_or(t);
    }
    x = std::move(candidate);
    g = std::move(g_new);
    f = f_candidate;
    gnorm = g.norm();
    window.push_back(f);
    while (static_cast<int>(window.size()) > opts.window_w) window.pop_front();
    if (!accepted) trace.status = Status::stalled;
    if (opts.record_trace) trace.records.push_back({f, gnorm, t, backtracks, clock.seconds(), accepted});
  }
  trace.iterations = k;
  if (trace.status == Status::max_iters && gnorm / std::max(x.norm(), 1.0) <= opts.tol)
    trace.status = Status::converged;
  out.x = std::move(x);
  return out;
}

}  // namespace phaseret

#endif  // PHASERET_GRADIENT_ENGINE_HPP
