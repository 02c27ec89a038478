#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace phaseret;
using namespace phaseret::testing;

namespace {

Objective quadratic(const Vec& c) {
  Objective obj;
  obj.value = [c](const Vec& x) { return 0.5 * (x - c).squaredNorm(); };
  obj.gradient = [c](const Vec& x) -> Vec { return x - c; };
  return obj;
}

/// Checks f_{k+1} < max of the previous min(w, k+1) objectives (with slack)
/// for every accepted record.
void expect_windowed_condition(const Trace& trace, int w) {
  const auto& r = trace.records;
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (!r[k].accepted) continue;
    const std::size_t from = k >= static_cast<std::size_t>(w) ? k - static_cast<std::size_t>(w) : 0;
    std::vector<double> hist;
    for (std::size_t j = from; j < k; ++j) hist.push_back(r[j].objective);
    // The recorded objective is taken after the weight refresh, which for
    // uniform weights equals the accepted trial value.
    EXPECT_TRUE(nonmonotone_accept(r[k].objective, hist)) << "iteration " << k;
  }
}

}  // namespace

TEST(BbStepsize, IdentityHessianGivesUnitStep) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vec dx = random_vector(5, s);
    const auto tau = bb_stepsize(dx, dx);
    ASSERT_TRUE(tau.has_value());
    EXPECT_NEAR(*tau, 1.0, 1e-15);
  }
}

TEST(BbStepsize, DiagonalHessianRayleighBound) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Vec dx = random_vector(2, s).real().cast<Complex>();
    Vec dg = dx;
    dg[1] *= 4.0;
    const auto tau = bb_stepsize(dx, dg);
    ASSERT_TRUE(tau.has_value());
    EXPECT_GE(*tau, 0.25 - 1e-15);
    EXPECT_LE(*tau, 1.0 + 1e-15);
  }
}

TEST(BbStepsize, OrthogonalOrNegativeCurvatureIsInvalid) {
  Vec dx(2), dg(2);
  dx << 1.0, 0.0;
  dg << 0.0, 1.0;
  EXPECT_FALSE(bb_stepsize(dx, dg).has_value());
  EXPECT_FALSE(bb_stepsize(dx, Vec(-dx)).has_value());
  EXPECT_FALSE(bb_stepsize(Vec::Zero(2), dg).has_value());
  Vec dgi(2);
  dgi << Complex(0, 1), 0.0;  // Re<dx, i dx> = 0
  EXPECT_FALSE(bb_stepsize(dx, dgi).has_value());
}

TEST(NonmonotoneAccept, WindowExamples) {
  const std::vector<double> h{5, 3, 4};
  EXPECT_TRUE(nonmonotone_accept(4.5, h));
  EXPECT_FALSE(nonmonotone_accept(5.0, h));
  const std::vector<double> one{3};
  EXPECT_TRUE(nonmonotone_accept(2.9, one));
  EXPECT_FALSE(nonmonotone_accept(3.1, one));
}

TEST(NonmonotoneAccept, SlackRejectsRoundoffLevelDecrease) {
  const std::vector<double> h{1e6};
  EXPECT_FALSE(nonmonotone_accept(1e6 * (1 - 1e-14), h));
  EXPECT_TRUE(nonmonotone_accept(1e6 * (1 - 1e-10), h));
  EXPECT_THROW(nonmonotone_accept(1.0, std::vector<double>{}), ArgumentError);
}

TEST(Minimize, StronglyConvexQuadratic) {
  Vec c(2);
  c << Complex(1, 0), Complex(0, 2);
  SolveOptions opts;
  opts.max_iters = 50;
  const auto r = minimize(quadratic(c), Vec::Zero(2), opts);
  EXPECT_EQ(r.trace.status, Status::converged);
  EXPECT_LE((r.x - c).norm(), 1e-6);
  EXPECT_LE(r.trace.iterations, 50);
}

TEST(Minimize, IllConditionedQuadraticWithBarzilaiBorwein) {
  const Index n = 20;
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, 1.0, 1000.0);
  const Vec c = random_vector(n, 3);
  Objective obj;
  obj.value = [d, c](const Vec& x) {
    const Vec e = x - c;
    return 0.5 * (e.cwiseAbs2().array() * d.array()).sum();
  };
  obj.gradient = [d, c](const Vec& x) -> Vec { return (x - c).cwiseProduct(d.cast<Complex>()); };
  SolveOptions opts;
  opts.tol = 1e-10;
  const auto r = minimize(obj, Vec::Zero(n), opts);
  EXPECT_EQ(r.trace.status, Status::converged);
  EXPECT_LE((r.x - c).norm(), 1e-8 * c.norm());
  expect_windowed_condition(r.trace, opts.window_w);
}

TEST(Minimize, AmplitudeFlowRecoversGaussianSignals) {
  int successes = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto inst = gaussian_instance(32, 8 * 32, 4000 + t);
    EigOptions eig;
    eig.seed = t;
    const auto init = spectral_init(inst, PreprocessFn::optimal(8.0), eig);
    SolveOptions opts;
    opts.max_iters = 1000;
    const auto r = minimize(objective_for(inst, FamilySpec::af()), init.x0, opts);
    successes += phase_aligned_error(*inst.x_true(), r.x) <= 1e-5;
    expect_windowed_condition(r.trace, opts.window_w);
    EXPECT_LE(r.trace.records.size(), 1001u);
  }
  EXPECT_GE(successes, 95);
}

TEST(Minimize, UnitWindowIsMonotone) {
  const auto inst = gaussian_instance(16, 96, 12);
  const auto init = spectral_init(inst, PreprocessFn::optimal(6.0));
  SolveOptions opts;
  opts.window_w = 1;
  opts.max_iters = 300;
  const auto r = minimize(objective_for(inst, FamilySpec::wf()), init.x0, opts);
  for (std::size_t k = 1; k < r.trace.records.size(); ++k)
    EXPECT_LE(r.trace.records[k].objective, r.trace.records[k - 1].objective);
}

TEST(Minimize, NonFiniteGradientNamesIteration) {
  auto calls = std::make_shared<int>(0);
  Objective obj = quadratic(Vec::Ones(3));
  obj.gradient = [calls](const Vec& x) -> Vec {
    if ((*calls)++ >= 1) return Vec::Constant(x.size(), Complex(std::nan(""), 0.0));
    return x - Vec::Ones(3);
  };
  try {
    minimize(obj, Vec::Zero(3));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.iteration(), 1);
  }
}

TEST(Minimize, NonFiniteStartIsRejected) {
  Objective obj = quadratic(Vec::Ones(2));
  EXPECT_THROW(minimize(obj, Vec::Constant(2, Complex(std::numeric_limits<double>::infinity(), 0))), NumericError);
}

TEST(Minimize, FixedStepDivergenceRaisesNumericError) {
  SolveOptions opts;
  opts.step_rule = StepRule::fixed;
  opts.tau0 = 1e10;
  EXPECT_THROW(minimize(quadratic(Vec::Ones(2)), Vec::Zero(2), opts), NumericError);
}

TEST(Minimize, FixedStepConvergesWhenStable) {
  SolveOptions opts;
  opts.step_rule = StepRule::fixed;
  opts.tau0 = 0.5;
  const auto r = minimize(quadratic(Vec::Ones(2)), Vec::Zero(2), opts);
  EXPECT_EQ(r.trace.status, Status::converged);
  for (std::size_t k = 1; k < r.trace.records.size(); ++k) EXPECT_EQ(r.trace.records[k].stepsize, 0.5);
}

TEST(Minimize, AscentGradientStallsWithoutMoving) {
  Objective obj = quadratic(Vec::Ones(2));
  obj.gradient = [](const Vec& x) -> Vec { return Vec::Ones(2) - x; };
  SolveOptions opts;
  opts.max_backtracks = 4;
  const auto r = minimize(obj, Vec::Zero(2), opts);
  EXPECT_EQ(r.trace.status, Status::stalled);
  EXPECT_EQ(r.x, Vec::Zero(2));
  EXPECT_TRUE(all_finite(r.x));
}

TEST(Minimize, ZeroIterationsKeepsStart) {
  SolveOptions opts;
  opts.max_iters = 0;
  const Vec x0 = random_vector(3, 1);
  const auto r = minimize(quadratic(Vec::Zero(3)), x0, opts);
  EXPECT_EQ(r.x, x0);
  EXPECT_EQ(r.trace.records.size(), 1u);
  EXPECT_EQ(r.trace.status, Status::max_iters);
}

TEST(Minimize, TimeBudgetStopsEarly) {
  SolveOptions opts;
  opts.time_budget_s = 0.0;
  const auto r = minimize(quadratic(Vec::Ones(3)), Vec::Zero(3), opts);
  EXPECT_EQ(r.trace.iterations, 0);
}

TEST(Minimize, TraceCanBeDisabled) {
  SolveOptions opts;
  opts.record_trace = false;
  const auto r = minimize(quadratic(Vec::Ones(3)), Vec::Zero(3), opts);
  EXPECT_TRUE(r.trace.records.empty());
  EXPECT_GT(r.trace.iterations, 0);
}

TEST(Minimize, ValidatesOptions) {
  const auto obj = quadratic(Vec::Ones(1));
  SolveOptions o;
  o.window_w = 0;
  EXPECT_THROW(minimize(obj, Vec::Zero(1), o), ArgumentError);
  o = {};
  o.backtrack_beta = 1.0;
  EXPECT_THROW(minimize(obj, Vec::Zero(1), o), ArgumentError);
  o = {};
  o.tau0 = -1.0;
  EXPECT_THROW(minimize(obj, Vec::Zero(1), o), ArgumentError);
}

TEST(Minimize, StatusNames) {
  EXPECT_EQ(to_string(Status::converged), "converged");
  EXPECT_EQ(to_string(Status::max_iters), "max_iters");
  EXPECT_EQ(to_string(Status::stalled), "stalled");
  EXPECT_EQ(to_string(Status::error), "error");
}
