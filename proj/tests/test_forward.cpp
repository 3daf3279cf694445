#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "slinv/forward.hpp"
#include "slinv/spectra.hpp"
#include "test_support.hpp"

using namespace slinv;
using std::numbers::pi;

namespace {

// Characteristic function of -u'' = lambda u, u(0) = 1, u'(0) = -h0,
// evaluated as h1 u(1) + u'(1) from the closed-form solution.
double characteristic(double lambda, double h0, double h1) {
  double u, du;
  if (lambda > 0) {
    const double k = std::sqrt(lambda);
    u = std::cos(k) - h0 / k * std::sin(k);
    du = -k * std::sin(k) - h0 * std::cos(k);
  } else if (lambda < 0) {
    const double k = std::sqrt(-lambda);
    u = std::cosh(k) - h0 / k * std::sinh(k);
    du = k * std::sinh(k) - h0 * std::cosh(k);
  } else {
    u = 1.0 - h0;
    du = -h0;
  }
  return h1 * u + du;
}

// Dense sweep + bisection on the characteristic function.
std::vector<double> oracle_eigenvalues(double h0, double h1, int count) {
  std::vector<double> roots;
  const double step = 0.0137;  // not commensurate with any expected root
  double a = -100.0 + 0.00371, fa = characteristic(a, h0, h1);
  while (static_cast<int>(roots.size()) < count) {
    const double b = a + step, fb = characteristic(b, h0, h1);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * (1 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi), fm = characteristic(mid, h0, h1);
        if ((fm < 0) == (flo < 0))
          lo = mid, flo = fm;
        else
          hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b, fa = fb;
  }
  return roots;
}

// q = 0, h0 = h1 = 3: characteristic function is (k - 9/k) sinh k for
// lambda = -k^2 and -(k + 9/k) sin k for lambda = k^2.
const std::vector<double> kRobin33 = {-9.0, pi * pi, 4 * pi * pi, 9 * pi * pi, 16 * pi * pi};

}  // namespace

TEST(Oracle, DenseSweepMatchesFrozenRobinValues) {
  const auto roots = oracle_eigenvalues(3.0, 3.0, 5);
  for (int n = 0; n < 5; ++n) EXPECT_NEAR(roots[n], kRobin33[n], 1e-9 * (1 + std::abs(kRobin33[n])));
}

TEST(SolveEigenvalue, NeumannZeroPotential) {
  const auto q = Potential::zero(1024);
  for (int n = 0; n <= 20; ++n)
    EXPECT_NEAR(solve_eigenvalue(q, {0, 0}, n), n * n * pi * pi, 1e-6 * (1 + n * n)) << n;
  EXPECT_NEAR(solve_eigenvalue(q, {0, 0}, 1), 9.8696044010893586, 1e-9);
  EXPECT_NEAR(solve_eigenvalue(q, {0, 0}, 2), 39.478417604357434, 1e-9);
}

TEST(SolveEigenvalue, RobinMatchesOracle) {
  const auto q = Potential::zero(512);
  for (int n = 0; n < 5; ++n)
    EXPECT_NEAR(solve_eigenvalue(q, {3, 3}, n), kRobin33[n], 1e-8 * (1 + std::abs(kRobin33[n]))) << n;
}

TEST(SolveEigenvalue, AsymmetricRobinMatchesOracle) {
  const auto q = Potential::zero(512);
  const auto roots = oracle_eigenvalues(-1.5, 2.0, 8);
  for (int n = 0; n < 8; ++n)
    EXPECT_NEAR(solve_eigenvalue(q, {-1.5, 2.0}, n), roots[n], 1e-7 * (1 + std::abs(roots[n]))) << n;
}

TEST(SolveEigenvalue, ShiftCovariance) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 1024);
  for (double c : {-5.0, 1.0, 10.0})
    for (int n = 0; n <= 10; ++n) {
      const double base = solve_eigenvalue(q, {3, 0}, n);
      EXPECT_NEAR(solve_eigenvalue(q.shifted(c), {3, 0}, n) - base - c, 0.0, 1e-8);
    }
  // Constant potential: shifted Neumann spectrum.
  for (int n = 0; n <= 5; ++n)
    EXPECT_NEAR(solve_eigenvalue(Potential::constant(512, 2.5), {0, 0}, n), n * n * pi * pi + 2.5, 1e-8);
}

TEST(SolveEigenvalue, StrictlyIncreasingInIndex) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 512);
  for (RobinPair bc : {RobinPair{3, 3}, RobinPair{3, 0}, RobinPair{-2, 5}}) {
    double prev = -INFINITY;
    for (int n = 0; n <= 30; ++n) {
      const double l = solve_eigenvalue(q, bc, n);
      EXPECT_LT(prev, l);
      prev = l;
    }
  }
}

TEST(SolveEigenvalue, Deterministic) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 512);
  EXPECT_EQ(solve_eigenvalue(q, {3, 3}, 7), solve_eigenvalue(q, {3, 3}, 7));
}

TEST(SolveEigenvalue, RejectsBadInput) {
  const auto q = Potential::zero(64);
  EXPECT_THROW(solve_eigenvalue(q, {0, 0}, -1), ValidationError);
  EXPECT_THROW(solve_eigenvalue(q, {INFINITY, 0}, 0), ValidationError);
}

TEST(SolveEigenvalue, IterationCapReportsBracket) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 256);
  ForwardOptions opts;
  opts.max_iter = 1;
  try {
    solve_eigenvalue(q, {3, 3}, 4, opts);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.index(), 4);
    EXPECT_LE(e.bracket_lo(), e.bracket_hi());
  }
}

TEST(AsymptoticRemainder, BoundedTailOnBenchmark) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 1024);
  const RobinPair bc{3, 3};
  auto remainder = [&](int n) {
    return solve_eigenvalue(q, bc, n) - pi * pi * n * n - 2.0 * (bc.h_right - bc.h_left) - q.mean();
  };
  const double a5 = std::abs(remainder(5));
  for (int n = 5; n <= 25; ++n) EXPECT_LE(std::abs(remainder(n)), a5 + 0.5) << n;
}

TEST(SolveEigenfunction, NeumannClosedForm) {
  const std::size_t M = 1024;
  const auto q = Potential::zero(M);
  const auto p0 = solve_eigenfunction(q, {0, 0}, 0.0, 0);
  EXPECT_NEAR(p0.g0 * p0.g0, 1.0, 1e-12);
  EXPECT_NEAR(p0.g1 * p0.g1, 1.0, 1e-12);
  for (double v : p0.g.values) EXPECT_NEAR(v, 1.0, 1e-12);

  for (int n = 1; n <= 4; ++n) {
    const auto p = solve_eigenfunction(q, {0, 0}, n * n * pi * pi, n);
    EXPECT_NEAR(p.g0 * p.g0, 2.0, 1e-6);
    EXPECT_NEAR(p.g1 * p.g1, 2.0, 1e-6);
    for (std::size_t k = 0; k <= M; k += 97)
      EXPECT_NEAR(p.g.values[k], std::sqrt(2.0) * std::cos(n * pi * grid_node(k, M)), 1e-6);
  }
}

TEST(SolveEigenfunction, RobinGroundStateIsDecayingExponential) {
  const std::size_t M = 1024;
  const auto q = Potential::zero(M);
  const double lambda0 = solve_eigenvalue(q, {3, 3}, 0);
  const auto p = solve_eigenfunction(q, {3, 3}, lambda0, 0);
  EXPECT_NEAR(trapz_norm(p.g.values), 1.0, 1e-8);
  EXPECT_EQ(sign_changes(p.g.values), 0);
  // g = exp(-3x) / ||exp(-3x)||; the discrete norm is trapezoidal.
  std::vector<double> e(M + 1);
  for (std::size_t k = 0; k <= M; ++k) e[k] = std::exp(-3.0 * grid_node(k, M));
  const double nrm = trapz_norm(e);
  EXPECT_NEAR(p.g0, 1.0 / nrm, 1e-8);
  EXPECT_NEAR(p.g1, std::exp(-3.0) / nrm, 1e-8);
}

TEST(SolveEigenfunction, NormalizedWithIndexManyZeros) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 1024);
  for (RobinPair bc : {RobinPair{3, 3}, RobinPair{3, 0}})
    for (int n = 0; n <= 29; ++n) {
      const auto p = solve_eigenpair(q, bc, n);
      EXPECT_NEAR(trapz_norm(p.g.values), 1.0, 1e-8);
      EXPECT_EQ(sign_changes(p.g.values), n);
      EXPECT_DOUBLE_EQ(p.g0, p.g.values.front());
      EXPECT_DOUBLE_EQ(p.g1, p.g.values.back());
    }
}

TEST(SolveIvpBackward, ClosedForms) {
  const std::size_t M = 1024;
  const auto q = Potential::zero(M);
  const auto one = solve_ivp_backward(q, 0.0, 1.0, 0.0);
  for (double v : one.values) EXPECT_DOUBLE_EQ(v, 1.0);

  const auto c = solve_ivp_backward(q, pi * pi, 1.0, 0.0);
  for (std::size_t k = 0; k <= M; k += 64)
    EXPECT_NEAR(c.values[k], std::cos(pi * (grid_node(k, M) - 1.0)), 1e-9);
  EXPECT_NEAR(c.values.front(), -1.0, 1e-9);
}

TEST(SolveIvpBackward, ForwardRoundTripOnBenchmark) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 1024);
  const double lambda0 = solve_eigenvalue(q, {3, 3}, 0);
  const auto back = solve_ivp_backward(q, lambda0, 1.0, -3.0);
  const auto fwd = solve_ivp_forward(q, lambda0, back.values.front(), back.derivs.front());
  EXPECT_NEAR(fwd.values.back(), 1.0, 1e-6);
  EXPECT_NEAR(fwd.derivs.back(), -3.0, 1e-6);
}

TEST(SolveIvpBackward, OverflowIsReported) {
  const auto q = Potential::zero(64);
  EXPECT_THROW(solve_ivp_backward(q, -1e7, 1.0, 0.0), SolverError);
}

TEST(Grid, PotentialValidation) {
  EXPECT_THROW(Potential(std::vector<double>{1.0, 2.0}), ValidationError);
  EXPECT_THROW(Potential(std::vector<double>{1.0, NAN, 2.0}), ValidationError);
  const auto q = Potential::sample(8, [](double x) { return x; });
  EXPECT_DOUBLE_EQ(q.mean(), 0.5);
  EXPECT_DOUBLE_EQ(q.at(0.3), 0.3);
  EXPECT_EQ(q.resampled(16).grid_size(), 16u);
}

TEST(Grid, CorrectedTrapezoidIsExactForCubics) {
  const auto f = Potential::sample(12, [](double x) { return 4 * x * x * x - x + 2; });
  EXPECT_NEAR(trapz_corrected(f.values()), 1.0 - 0.5 + 2.0, 1e-14);
}
