#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace phaseret;
using namespace phaseret::testing;

namespace {

InitResult from_point(const Vec& x0) {
  InitResult r;
  r.x0 = x0;
  r.raw_direction = x0.norm() > 0 ? Vec(x0 / x0.norm()) : x0;
  r.alpha = x0.norm();
  r.diagnostics = "manual";
  return r;
}

InitResult spectral_optimal(const Instance& inst, std::uint64_t seed) {
  EigOptions eig;
  eig.seed = seed;
  InitializerSpec spec;
  return run_initializer(inst, spec, eig);
}

struct Scalar {
  double value;
  Vec gradient;
};

/// Scalar-loop evaluation of 1/2 sum w_i (|a_i^H x|^p - b_i^p)^2 and its gradient.
Scalar scalar_loop_objective(const Mat& a, const RVec& b, const RVec& w, int p, const Vec& x) {
  Scalar s{0.0, Vec::Zero(x.size())};
  for (Index i = 0; i < a.rows(); ++i) {
    Complex z = 0.0;
    for (Index j = 0; j < a.cols(); ++j) z += a(i, j) * x[j];
    const double mag = std::abs(z);
    const double r = p == 2 ? mag * mag - b[i] * b[i] : mag - b[i];
    s.value += 0.5 * w[i] * r * r;
    Complex coeff = 0.0;
    if (p == 2)
      coeff = 2.0 * w[i] * r * z;
    else if (mag > 0)
      coeff = w[i] * r * z / mag;
    for (Index j = 0; j < a.cols(); ++j) s.gradient[j] += std::conj(a(i, j)) * coeff;
  }
  return s;
}

double relative_gap(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

int count_successes(const std::string& alg, Index n, double ratio, int trials, double threshold,
                    std::uint64_t base, int max_iters = 1000) {
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    const auto seed = base + static_cast<std::uint64_t>(t);
    const auto inst = gaussian_instance(n, static_cast<Index>(std::lround(ratio * static_cast<double>(n))), seed);
    const auto init = spectral_optimal(inst, seed);
    SolveOptions opts;
    opts.max_iters = max_iters;
    opts.seed = seed;
    opts.record_trace = false;
    const auto r = solve(alg, inst, init, opts);
    ok += phase_aligned_error(*inst.x_true(), r.x_hat) <= threshold;
  }
  return ok;
}

}  // namespace

TEST(Objective, ExactMagnitudesAreGlobalMinimisers) {
  const auto inst = gaussian_instance(6, 30, 1);
  for (const auto& spec : {FamilySpec::wf(), FamilySpec::af()}) {
    const auto obj = objective_for(inst, spec);
    EXPECT_LE(obj.value(*inst.x_true()), 1e-28);
    EXPECT_LE(obj.gradient(*inst.x_true()).norm(), 1e-13);
  }
}

TEST(Objective, ScalarHandComputation) {
  Mat a(1, 1);
  a(0, 0) = 1.0;
  RVec b(1);
  b[0] = 2.0;
  const Instance inst(dense_operator(a), b);
  const auto obj = objective_for(inst, FamilySpec::wf());
  Vec x(1);
  x[0] = 1.0;
  EXPECT_DOUBLE_EQ(obj.value(x), 4.5);
  // d/dx of 1/2 (x^2 - 4)^2 at x = 1 is 2x (x^2 - 4) = -6.
  const Vec g = obj.gradient(x);
  EXPECT_DOUBLE_EQ(g[0].real(), -6.0);
  EXPECT_DOUBLE_EQ(g[0].imag(), 0.0);
  const Vec fd = finite_difference_gradient(obj.value, x);
  EXPECT_NEAR(fd[0].real(), -6.0, 1e-8);
}

TEST(Objective, SmoothGradientMatchesFiniteDifferences) {
  for (std::uint64_t inst_seed = 0; inst_seed < 5; ++inst_seed) {
    const auto inst = gaussian_instance(8, 40, 60 + inst_seed);
    const auto obj = objective_for(inst, FamilySpec::wf());
    for (std::uint64_t p = 0; p < 20; ++p) {
      const Vec x = random_vector(8, 1000 * inst_seed + p) * 0.5;
      EXPECT_LE(relative_gap(obj.gradient(x), finite_difference_gradient(obj.value, x)), 1e-5);
    }
  }
}

TEST(Objective, AmplitudeObjectiveMatchesScalarOracleAndFiniteDifferences) {
  const Mat a = random_matrix(20, 5, 3);
  const Vec xt = random_vector(5, 4);
  const RVec b = (a * xt).cwiseAbs();
  const Instance inst(dense_operator(a), b);
  const auto obj = objective_for(inst, FamilySpec::af());
  for (std::uint64_t p = 0; p < 50; ++p) {
    const Vec x = random_vector(5, 500 + p);
    const Scalar oracle = scalar_loop_objective(a, b, RVec::Ones(20), 1, x);
    EXPECT_NEAR(obj.value(x), oracle.value, 1e-12 * std::max(1.0, oracle.value));
    EXPECT_LE(relative_gap(obj.gradient(x), oracle.gradient), 1e-12);
    const double closest = (a * x).cwiseAbs().minCoeff();
    if (closest > 1e-3) {
      EXPECT_LE(relative_gap(obj.gradient(x), finite_difference_gradient(obj.value, x)), 1e-5);
    }
  }
}

TEST(Objective, IntensityObjectiveMatchesScalarOracle) {
  const Mat a = random_matrix(12, 4, 5);
  const RVec b = random_vector(12, 6).cwiseAbs();
  const Instance inst(dense_operator(a), b);
  const auto obj = objective_for(inst, FamilySpec::wf());
  for (std::uint64_t p = 0; p < 20; ++p) {
    const Vec x = random_vector(4, 700 + p);
    const Scalar oracle = scalar_loop_objective(a, b, RVec::Ones(12), 2, x);
    EXPECT_NEAR(obj.value(x), oracle.value, 1e-12 * std::max(1.0, oracle.value));
    EXPECT_LE(relative_gap(obj.gradient(x), oracle.gradient), 1e-12);
  }
}

TEST(Objective, AmplitudeGradientUsesZeroPhaseAtZero) {
  Mat a(2, 1);
  a << 1.0, 1.0;
  RVec b(2);
  b << 1.0, 1.0;
  const Instance inst(dense_operator(a), b);
  const auto obj = objective_for(inst, FamilySpec::af());
  EXPECT_EQ(obj.gradient(Vec::Zero(1)), Vec::Zero(1));
}

TEST(Objective, WeightedObjectivesMatchScalarOracleAtFrozenWeights) {
  const auto inst = gaussian_instance(6, 40, 8);
  const Mat a = [&] {
    Mat m(40, 6);
    for (Index i = 0; i < 40; ++i) m.row(i) = inst.op().row(i).adjoint();
    return m;
  }();
  for (const auto& spec : {FamilySpec::twf(), FamilySpec::taf(), FamilySpec::rwf(), FamilySpec::raf()}) {
    const Vec x = random_vector(6, 9) * 0.3;
    const auto obj = objective_for(inst, spec, x);
    const RVec w = family_weights(spec, (a * x).cwiseAbs(), inst.b());
    const Scalar oracle = scalar_loop_objective(a, inst.b(), w, spec.p, x);
    EXPECT_NEAR(obj.value(x), oracle.value, 1e-12 * std::max(1.0, oracle.value));
    EXPECT_LE(relative_gap(obj.gradient(x), oracle.gradient), 1e-12);
  }
}

TEST(Weights, StayInUnitIntervalAndCollapseWhenOff) {
  const RVec mag = random_vector(100, 1).cwiseAbs();
  RVec b = random_vector(100, 2).cwiseAbs();
  b[0] = 0.0;
  RVec mag0 = mag;
  mag0[1] = 0.0;
  for (const auto& spec : {FamilySpec::twf(), FamilySpec::taf(), FamilySpec::rwf(), FamilySpec::raf(),
                           FamilySpec::twf(2.0, 3.0)}) {
    const RVec w = family_weights(spec, mag0, b);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_LE(w.maxCoeff(), 1.0);
  }
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(family_weights(FamilySpec::twf(inf, inf), mag0, b), RVec::Ones(100));
  EXPECT_EQ(family_weights(FamilySpec::raf(0.0), mag0, b), RVec::Ones(100));
  const RVec tw = family_weights(FamilySpec::twf(), mag0, b);
  EXPECT_LT(tw.sum(), 100.0);
}

TEST(Weights, OffParametersReproduceUniformSolversExactly) {
  const auto inst = gaussian_instance(16, 96, 21);
  const auto init = spectral_optimal(inst, 21);
  SolveOptions opts;
  opts.max_iters = 200;
  const double inf = std::numeric_limits<double>::infinity();
  const auto wf = solve_gradient_family(inst, FamilySpec::wf(), init, opts);
  const auto twf = solve_gradient_family(inst, FamilySpec::twf(inf, inf), init, opts);
  const auto rwf = solve_gradient_family(inst, FamilySpec::rwf(0.0), init, opts);
  EXPECT_EQ(wf.x_hat, twf.x_hat);
  EXPECT_EQ(wf.x_hat, rwf.x_hat);
  const auto af = solve_gradient_family(inst, FamilySpec::af(), init, opts);
  EXPECT_EQ(af.x_hat, solve_gradient_family(inst, FamilySpec::taf(inf, inf), init, opts).x_hat);
  EXPECT_EQ(af.x_hat, solve_gradient_family(inst, FamilySpec::raf(0.0), init, opts).x_hat);
}

TEST(GradientFamily, WirtingerFlowMonteCarlo) { EXPECT_GE(count_successes("wf", 64, 10.0, 100, 1e-5, 10000), 95); }

TEST(GradientFamily, AmplitudeFlowMonteCarlo) { EXPECT_GE(count_successes("af", 64, 6.0, 100, 1e-5, 11000), 95); }

TEST(GradientFamily, VariantsRecoverAtModerateOversampling) {
  for (const char* alg : {"twf", "rwf", "taf", "raf"})
    EXPECT_GE(count_successes(alg, 32, 8.0, 10, 1e-5, 12000), 9) << alg;
}

TEST(GradientFamily, HopelessUndersamplingTerminatesCleanly) {
  const auto inst = gaussian_instance(64, 32, 5);
  const auto init = spectral_optimal(inst, 5);
  for (const char* alg : {"wf", "af", "twf", "taf", "rwf", "raf"}) {
    SolveOptions opts;
    opts.max_iters = 300;
    const auto r = solve(alg, inst, init, opts);
    EXPECT_TRUE(r.trace.status == Status::converged || r.trace.status == Status::max_iters ||
                r.trace.status == Status::stalled)
        << alg;
    EXPECT_TRUE(all_finite(r.x_hat)) << alg;
    EXPECT_LE(r.trace.iterations, 300);
  }
}

TEST(GradientFamily, RejectsMismatchedInit) {
  const auto inst = gaussian_instance(4, 16, 1);
  EXPECT_THROW(solve("wf", inst, from_point(Vec::Ones(5))), ArgumentError);
}

TEST(LeastSquares, SolvesConsistentSystem) {
  const Mat a = random_matrix(30, 6, 2);
  const Vec x = random_vector(6, 3);
  const auto r = solve_least_squares(dense_operator(a), a * x, Vec::Zero(6));
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.x - x).norm(), 1e-8 * x.norm());
}

TEST(GerchbergSaxton, IdentityOperatorOneStep) {
  RVec b(2);
  b << 1.0, 2.0;
  const Instance inst(dense_operator(Mat::Identity(2, 2)), b);
  Vec x0(2);
  x0 << Complex(1, 1), Complex(-3, 0);
  Vec expected(2);
  expected << Complex(1, 1) / std::sqrt(2.0), Complex(-2, 0);
  SolveOptions one;
  one.max_iters = 1;
  const auto step = solve_gerchberg_saxton(inst, from_point(x0), one);
  EXPECT_LE((step.x_hat - expected).norm(), 1e-12);
  const auto full = solve_gerchberg_saxton(inst, from_point(x0));
  EXPECT_EQ(full.trace.status, Status::converged);
  EXPECT_LE((full.x_hat - expected).norm(), 1e-12);
}

TEST(GerchbergSaxton, MonteCarloRecovery) { EXPECT_GE(count_successes("gs", 64, 8.0, 100, 1e-5, 13000), 95); }

TEST(GerchbergSaxton, ResidualIsNonincreasingWithTightSubsolver) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto inst = gaussian_instance(32, 256, 14000 + t);
    const auto init = spectral_optimal(inst, t);
    LsqOptions lsq;
    lsq.tol = 1e-12;
    lsq.max_iters = 500;
    SolveOptions opts;
    opts.max_iters = 200;
    const auto r = solve_gerchberg_saxton(inst, init, opts, lsq);
    const auto& rec = r.trace.records;
    for (std::size_t k = 1; k < rec.size(); ++k)
      EXPECT_LE(rec[k].objective, rec[k - 1].objective * (1.0 + 1e-9) + 1e-13) << "trial " << t << " it " << k;
  }
}

TEST(Fienup, UnitRelaxationReproducesGerchbergSaxton) {
  const auto inst = gaussian_instance(16, 128, 3);
  const auto init = spectral_optimal(inst, 3);
  SolveOptions opts;
  opts.max_iters = 50;
  const auto gs = solve_gerchberg_saxton(inst, init, opts);
  const auto fi = solve_fienup(inst, init, opts, 1.0);
  EXPECT_EQ(gs.x_hat, fi.x_hat);
  ASSERT_EQ(gs.trace.records.size(), fi.trace.records.size());
  for (std::size_t k = 0; k < gs.trace.records.size(); ++k)
    EXPECT_EQ(gs.trace.records[k].objective, fi.trace.records[k].objective);
}

TEST(Fienup, MonteCarloRecovery) { EXPECT_GE(count_successes("fienup", 64, 8.0, 100, 1e-5, 15000), 95); }

TEST(Fienup, ZeroRelaxationNeverMoves) {
  const auto inst = gaussian_instance(8, 64, 4);
  const auto init = spectral_optimal(inst, 4);
  SolveOptions opts;
  opts.max_iters = 25;
  const auto r = solve_fienup(inst, init, opts, 0.0);
  EXPECT_EQ(r.x_hat, init.x0);
  EXPECT_EQ(r.trace.status, Status::max_iters);
  EXPECT_EQ(r.trace.iterations, 25);
}

TEST(Fienup, RejectsRelaxationOutsideUnitInterval) {
  const auto inst = gaussian_instance(4, 16, 4);
  const auto init = spectral_optimal(inst, 4);
  EXPECT_THROW(solve_fienup(inst, init, {}, 1.5), ArgumentError);
  EXPECT_THROW(solve_fienup(inst, init, {}, -0.1), ArgumentError);
}

TEST(Kaczmarz, ScalarCase) {
  Mat a(1, 1);
  a(0, 0) = 2.0;
  RVec b(1);
  b[0] = 4.0;
  const Instance inst(dense_operator(a), b);
  SolveOptions one;
  one.max_iters = 1;
  const auto r = solve_kaczmarz(inst, from_point(Vec::Ones(1)), one);
  EXPECT_NEAR(std::abs(r.x_hat[0] - Complex(2.0)), 0.0, 1e-15);
}

TEST(Kaczmarz, SingleRowUpdateProjectsOntoMagnitude) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Mat a = random_matrix(1, 5, s);
    RVec b(1);
    b[0] = 0.3 + static_cast<double>(s);
    const Instance inst(dense_operator(a), b);
    SolveOptions one;
    one.max_iters = 1;
    const auto r = solve_kaczmarz(inst, from_point(random_vector(5, 100 + s)), one);
    EXPECT_NEAR(std::abs((a * r.x_hat)[0]), b[0], 1e-12 * std::max(1.0, b[0]));
  }
}

TEST(Kaczmarz, MonteCarloRecovery) { EXPECT_GE(count_successes("kaczmarz", 64, 8.0, 100, 1e-3, 16000, 200), 90); }

TEST(Kaczmarz, SkipsZeroRows) {
  Mat a = random_matrix(40, 4, 1);
  a.row(3).setZero();
  const Vec x = random_vector(4, 2);
  const Instance inst(dense_operator(a), (a * x).cwiseAbs(), x);
  const auto r = solve_kaczmarz(inst, spectral_optimal(inst, 0));
  EXPECT_NE(r.diagnostics.find("skipped 1 zero rows"), std::string::npos);
  EXPECT_TRUE(all_finite(r.x_hat));
}

TEST(Kaczmarz, SeedIsDeterministic) {
  const auto inst = gaussian_instance(8, 64, 3);
  const auto init = spectral_optimal(inst, 3);
  SolveOptions opts;
  opts.seed = 9;
  EXPECT_EQ(solve_kaczmarz(inst, init, opts).x_hat, solve_kaczmarz(inst, init, opts).x_hat);
}

TEST(PhaseMax, InteriorAnchorReachesFeasibleBoundary) {
  const auto inst = gaussian_instance(16, 16 * 12, 7);
  const Vec anchor = 0.5 * *inst.x_true();
  const auto r = solve_phasemax(inst, from_point(anchor));
  EXPECT_LE(max_violation(inst, r.x_hat), 1e-6);
  EXPECT_LE(phase_aligned_error(*inst.x_true(), r.x_hat), 1e-3);
}

TEST(PhaseMax, MonteCarloRecovery) { EXPECT_GE(count_successes("phasemax", 64, 12.0, 100, 1e-3, 17000), 80); }

TEST(PhaseMax, DirectionIsEquivariantUnderMeasurementScaling) {
  const auto inst = gaussian_instance(16, 16 * 12, 31);
  const RVec b2 = 2.0 * inst.b();
  const Instance inst2(inst.op(), b2, Vec(2.0 * *inst.x_true()));
  const auto init = from_point(spectral_optimal(inst, 31).x0);
  const auto r1 = solve_phasemax(inst, init);
  const auto r2 = solve_phasemax(inst2, init);
  const Vec d1 = r1.x_hat / r1.x_hat.norm();
  const Vec d2 = r2.x_hat / r2.x_hat.norm();
  EXPECT_LE(phase_aligned_error(d1, d2), 1e-6);
}

TEST(PhaseMax, RejectsZeroAnchor) {
  const auto inst = gaussian_instance(4, 16, 1);
  EXPECT_THROW(solve_phasemax(inst, from_point(Vec::Zero(4))), ArgumentError);
}

TEST(Catalog, EverySolverIsGlobalPhaseEquivariant) {
  GaussianSpec spec{16, 128, std::nullopt, 123, std::nullopt};
  const Vec x = random_vector(16, 55) / 4.0;
  const auto a = make_gaussian_instance(spec, x);
  const auto b = make_gaussian_instance(spec, Vec(std::polar(1.0, 2.1) * x));
  const auto ia = spectral_optimal(a, 1);
  const auto ib = spectral_optimal(b, 1);
  for (auto name : algorithm_names()) {
    SolveOptions opts;
    opts.max_iters = 300;
    opts.seed = 4;
    const auto ra = solve(name, a, ia, opts);
    const auto rb = solve(name, b, ib, opts);
    EXPECT_NEAR(phase_aligned_error(*a.x_true(), ra.x_hat), phase_aligned_error(*b.x_true(), rb.x_hat), 1e-10)
        << name;
  }
}

TEST(Catalog, EverySolverTerminatesOnAdversarialCorpus) {
  std::vector<Instance> corpus;
  {
    Mat a = random_matrix(48, 6, 1);
    a.row(0).setZero();
    a.row(7).setZero();
    corpus.emplace_back(dense_operator(a), (a * random_vector(6, 2)).cwiseAbs());
  }
  corpus.push_back(gaussian_instance(12, 5, 3));
  corpus.emplace_back(dense_operator(random_matrix(30, 5, 4)), RVec::Zero(30));
  for (const auto& inst : corpus) {
    const auto init = from_point(random_vector(inst.n(), 77));
    for (auto name : algorithm_names()) {
      SolveOptions opts;
      opts.max_iters = 100;
      const auto r = solve(name, inst, init, opts);
      EXPECT_TRUE(all_finite(r.x_hat)) << name;
      EXPECT_EQ(r.x_hat.size(), inst.n()) << name;
      EXPECT_LE(r.trace.iterations, name == "phasemax" ? 100 * 10 : 100) << name;
    }
  }
}

TEST(Catalog, DispatchAndNames) {
  EXPECT_EQ(algorithm_names().size(), 10u);
  for (auto n : algorithm_names()) EXPECT_TRUE(is_algorithm_name(n));
  EXPECT_FALSE(is_algorithm_name("nosuch"));
  const auto inst = gaussian_instance(4, 16, 1);
  try {
    solve("nosuch", inst, from_point(Vec::Ones(4)));
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("kaczmarz"), std::string::npos);
  }
}
