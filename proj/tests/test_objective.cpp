#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"

using namespace slinv;
using namespace slinv::testing;
using std::numbers::pi;

namespace {

SpectralTarget benchmark_target(std::size_t M) {
  return generate_target(benchmark_truth(M), two_spectra_indices(0, 29));
}

}  // namespace

TEST(EvalG, ZeroAtTruth) {
  const auto truth = benchmark_truth(512);
  const auto target = generate_target(truth, two_spectra_indices(0, 29));
  EXPECT_EQ(eval_G(truth, target), 0.0);
}

TEST(EvalG, SingleEntry) {
  const auto pv = benchmark_truth(256);
  const double l0 = solve_eigenvalue(pv.q(), pv.robin(1), 0);
  const SpectralTarget t({{1, 0, 1.25, 2.0}});
  EXPECT_DOUBLE_EQ(eval_G(pv, t), 2.0 * (l0 - 1.25) * (l0 - 1.25));
}

TEST(EvalG, MatchesTermByTermRecomputation) {
  const std::size_t M = 512;
  const auto pv = benchmark_truth(M);
  const auto target = generate_target(benchmark_initial(M), two_spectra_indices(0, 29));
  double expected = 0.0;
  for (const auto& e : target.entries()) {
    const double l = solve_eigenvalue(pv.q(), e.i == 1 ? RobinPair{3, 3} : RobinPair{3, 0}, e.n);
    expected += (l - e.lambda) * (l - e.lambda);
  }
  const double G = eval_G(pv, target);
  EXPECT_NEAR(G, expected, 1e-12 * expected);
  // Regression value from the first correct build (M = 512).
  EXPECT_NEAR(G, 296.53681928979432, 1e-9 * G);
}

TEST(EvalG, RejectsEmptyTarget) {
  EXPECT_THROW(eval_G(benchmark_truth(64), SpectralTarget(std::vector<SpectralEntry>{})), ValidationError);
}

TEST(SpectralTarget, Validation) {
  EXPECT_THROW(SpectralTarget({{3, 0, 1.0, 1.0}}), ValidationError);
  EXPECT_THROW(SpectralTarget({{1, -1, 1.0, 1.0}}), ValidationError);
  EXPECT_THROW(SpectralTarget({{1, 0, 1.0, 0.0}}), ValidationError);
  EXPECT_THROW(SpectralTarget({{1, 0, NAN, 1.0}}), ValidationError);
  EXPECT_THROW(SpectralTarget({{1, 0, 1.0, 1.0}, {1, 0, 2.0, 1.0}}), ValidationError);
}

TEST(ProblemVector, RejectsEqualRightParameters) {
  EXPECT_THROW(ProblemVector(1, 2, 2, Potential::zero(16)), ValidationError);
  EXPECT_THROW(ProblemVector(NAN, 2, 0, Potential::zero(16)), ValidationError);
}

TEST(EigenGradient, NeumannClosedForm) {
  const std::size_t M = 1024;
  const auto p = solve_eigenpair(Potential::zero(M), {0, 0}, 1);
  const auto g = eigen_gradient(p, 1);
  EXPECT_NEAR(g.d_h0, -2.0, 1e-6);
  EXPECT_NEAR(g.d_h1, 2.0, 1e-6);
  EXPECT_EQ(g.d_h2, 0.0);
  for (std::size_t k = 0; k <= M; k += 31) {
    const double c = std::cos(pi * grid_node(k, M));
    EXPECT_NEAR(g.d_q[k], 2.0 * c * c, 1e-6);
  }
  EXPECT_EQ(eigen_gradient(p, 2).d_h1, 0.0);
  EXPECT_THROW(eigen_gradient(p, 0), ValidationError);
}

TEST(EigenGradient, BoundaryDerivativesMatchFiniteDifferences) {
  const auto q = make_potential(PotentialKind::BenchStepRamp, 1024);
  const double eps = 1e-5;
  for (int n = 0; n <= 5; ++n) {
    const auto g = eigen_gradient(solve_eigenpair(q, {3, 3}, n), 1);
    const double d0 = central_difference([&](double e) { return solve_eigenvalue(q, {3 + e, 3}, n); }, eps);
    const double d1 = central_difference([&](double e) { return solve_eigenvalue(q, {3, 3 + e}, n); }, eps);
    EXPECT_NEAR(g.d_h0, d0, 1e-4 * std::abs(d0)) << n;
    EXPECT_NEAR(g.d_h1, d1, 1e-4 * std::abs(d1)) << n;
  }
}

TEST(EvalGradG, VanishesAtTruth) {
  const auto truth = benchmark_truth(512);
  const auto obj = eval_grad_G(truth, generate_target(truth, two_spectra_indices(0, 29)));
  EXPECT_EQ(obj.G, 0.0);
  EXPECT_LT(std::abs(obj.grad.d_h0), 1e-6);
  EXPECT_LT(std::abs(obj.grad.d_h1), 1e-6);
  EXPECT_LT(std::abs(obj.grad.d_h2), 1e-6);
  for (double v : obj.grad.d_q) EXPECT_LT(std::abs(v), 1e-6);
}

TEST(EvalGradG, AgreesWithEvalG) {
  const std::size_t M = 256;
  const auto target = benchmark_target(M);
  const auto pv = benchmark_initial(M);
  EXPECT_EQ(eval_grad_G(pv, target).G, eval_G(pv, target));
}

TEST(EvalGradG, DirectionalDerivativeMatchesFiniteDifferences) {
  const std::size_t M = 512;
  const auto target = benchmark_target(M);
  const auto pv = benchmark_initial(M);
  const auto obj = eval_grad_G(pv, target);
  SplitMix64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = smooth_random_direction(M, rng);
    const double fd = central_difference([&](double e) { return eval_G(displaced(pv, e, d), target); }, 1e-5);
    EXPECT_NEAR(inner(obj.grad, d), fd, 1e-3 * std::abs(fd)) << trial;
  }
}

TEST(EvalGradG, LinearInWeights) {
  const std::size_t M = 256;
  const auto target = benchmark_target(M);
  const auto pv = benchmark_initial(M);
  const auto a = eval_grad_G(pv, target);
  const auto b = eval_grad_G(pv, target.with_scaled_weights(2.0));
  EXPECT_EQ(b.G, 2.0 * a.G);
  EXPECT_EQ(b.grad.d_h0, 2.0 * a.grad.d_h0);
  EXPECT_EQ(b.grad.d_h1, 2.0 * a.grad.d_h1);
  EXPECT_EQ(b.grad.d_h2, 2.0 * a.grad.d_h2);
  for (std::size_t k = 0; k < a.grad.d_q.size(); ++k) EXPECT_EQ(b.grad.d_q[k], 2.0 * a.grad.d_q[k]);
}

TEST(EvalGradG, SingleSpectrumLeavesOtherParameterAlone) {
  const std::size_t M = 256;
  const auto pv = benchmark_initial(M);
  const auto target = generate_target(benchmark_truth(M), {{1, 0}, {1, 1}, {1, 2}});
  EXPECT_EQ(eval_grad_G(pv, target).grad.d_h2, 0.0);
}

// At trial vectors away from the solution the gradient must not vanish.
TEST(EvalGradG, NoSpuriousStationaryPoints) {
  const std::size_t M = 256;
  const auto target = benchmark_target(M);
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = smooth_random_direction(M, rng);
    const auto pv = displaced(benchmark_truth(M), 1.0, d);
    EXPECT_GT(norm(eval_grad_G(pv, target).grad), 1e-10) << trial;
  }
}

TEST(GradientVector, InnerProductIsTrapezoidal) {
  auto a = GradientVector::zero(4), b = GradientVector::zero(4);
  a.d_h0 = 1, a.d_h1 = 2, a.d_h2 = 3;
  b.d_h0 = 4, b.d_h1 = 5, b.d_h2 = 6;
  a.d_q = {1, 1, 1, 1, 1};
  b.d_q = {2, 2, 2, 2, 2};
  EXPECT_DOUBLE_EQ(inner(a, b), 32.0 + 2.0);
}
