#pragma once

// Least-squares eigenvalue functional
//
//   G(q) = sum_{(i,n) in I} w_{i,n} (lambda_{q_i,n} - target_{i,n})^2
//
// over the two trial problems q_1 = (h0, h1, q) and q_2 = (h0, h2, q), and its
// gradient in R^3 x L2 assembled from eigenvalue sensitivities
// (-g(0)^2, g(1)^2 [i=1], g(1)^2 [i=2], g(x)^2).

#include <cmath>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "slinv/error.hpp"
#include "slinv/forward.hpp"
#include "slinv/grid.hpp"

namespace slinv {

class ProblemVector {
 public:
  static constexpr double kMinGap = 1e-12;

  ProblemVector(double h0, double h1, double h2, Potential q)
      : h0_(h0), h1_(h1), h2_(h2), q_(std::move(q)) {
    if (!std::isfinite(h0) || !std::isfinite(h1) || !std::isfinite(h2))
      throw ValidationError("ProblemVector: boundary parameters must be finite");
    if (!(std::abs(h1 - h2) > kMinGap)) throw ValidationError("ProblemVector: requires h1 != h2");
  }

  double h0() const noexcept { return h0_; }
  double h1() const noexcept { return h1_; }
  double h2() const noexcept { return h2_; }
  const Potential& q() const noexcept { return q_; }
  std::size_t grid_size() const noexcept { return q_.grid_size(); }

  // Robin pair of spectrum 1 or 2.
  RobinPair robin(int spectrum) const {
    if (spectrum == 1) return {h0_, h1_};
    if (spectrum == 2) return {h0_, h2_};
    throw ValidationError("spectrum id must be 1 or 2");
  }

  double h_right(int spectrum) const { return robin(spectrum).h_right; }

  ProblemVector with_potential(Potential q) const { return {h0_, h1_, h2_, std::move(q)}; }

  bool operator==(const ProblemVector&) const = default;

 private:
  double h0_, h1_, h2_;
  Potential q_;
};

struct SpectralEntry {
  int i = 1;  // spectrum id, 1 or 2
  int n = 0;
  double lambda = 0.0;
  double weight = 1.0;

  bool operator==(const SpectralEntry&) const = default;
};

class SpectralTarget {
 public:
  SpectralTarget() = default;
  explicit SpectralTarget(std::vector<SpectralEntry> entries) : entries_(std::move(entries)) {
    std::set<std::pair<int, int>> seen;
    for (const auto& e : entries_) {
      if (e.i != 1 && e.i != 2) throw ValidationError("SpectralTarget: spectrum id must be 1 or 2");
      if (e.n < 0) throw ValidationError("SpectralTarget: negative index");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw ValidationError("SpectralTarget: weights must be positive");
      if (!std::isfinite(e.lambda)) throw ValidationError("SpectralTarget: non-finite eigenvalue");
      if (!seen.emplace(e.i, e.n).second) {
        std::ostringstream msg;
        msg << "SpectralTarget: duplicate entry (i=" << e.i << ", n=" << e.n << ")";
        throw ValidationError(msg.str());
      }
    }
  }

  const std::vector<SpectralEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  SpectralTarget with_scaled_weights(double factor) const {
    auto e = entries_;
    for (auto& x : e) x.weight *= factor;
    return SpectralTarget(std::move(e));
  }

  bool operator==(const SpectralTarget&) const = default;

 private:
  std::vector<SpectralEntry> entries_;
};

// Element of R^3 x L2 on the trial potential's grid. Also used as a search
// direction by the optimizer.
struct GradientVector {
  double d_h0 = 0.0;
  double d_h1 = 0.0;
  double d_h2 = 0.0;
  std::vector<double> d_q;

  static GradientVector zero(std::size_t M) { return {0.0, 0.0, 0.0, std::vector<double>(M + 1)}; }

  GradientVector& axpy(double a, const GradientVector& x) {
    if (x.d_q.size() != d_q.size()) throw ValidationError("GradientVector: grid mismatch");
    d_h0 += a * x.d_h0;
    d_h1 += a * x.d_h1;
    d_h2 += a * x.d_h2;
    for (std::size_t k = 0; k < d_q.size(); ++k) d_q[k] += a * x.d_q[k];
    return *this;
  }

  GradientVector scaled(double a) const {
    GradientVector r = *this;
    r.d_h0 *= a;
    r.d_h1 *= a;
    r.d_h2 *= a;
    for (double& v : r.d_q) v *= a;
    return r;
  }

  bool all_finite() const {
    if (!std::isfinite(d_h0) || !std::isfinite(d_h1) || !std::isfinite(d_h2)) return false;
    for (double v : d_q)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

// R^3 dot product plus trapezoidal L2 inner product.
inline double inner(const GradientVector& a, const GradientVector& b) {
  return a.d_h0 * b.d_h0 + a.d_h1 * b.d_h1 + a.d_h2 * b.d_h2 + trapz_inner(a.d_q, b.d_q);
}

inline double norm(const GradientVector& a) { return std::sqrt(inner(a, a)); }

// pv + alpha * d
inline ProblemVector displaced(const ProblemVector& pv, double alpha, const GradientVector& d) {
  if (d.d_q.size() != pv.q().size()) throw ValidationError("displaced: grid mismatch");
  std::vector<double> q(pv.q().values().begin(), pv.q().values().end());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] += alpha * d.d_q[k];
  return ProblemVector(pv.h0() + alpha * d.d_h0, pv.h1() + alpha * d.d_h1, pv.h2() + alpha * d.d_h2,
                       Potential(std::move(q)));
}

// Sensitivity of the eigenvalue of spectrum `spectrum_id` to (h0, h1, h2, q).
inline GradientVector eigen_gradient(const Eigenpair& pair, int spectrum_id) {
  if (spectrum_id != 1 && spectrum_id != 2) throw ValidationError("spectrum id must be 1 or 2");
  GradientVector g;
  g.d_h0 = -pair.g0 * pair.g0;
  const double right = pair.g1 * pair.g1;
  g.d_h1 = spectrum_id == 1 ? right : 0.0;
  g.d_h2 = spectrum_id == 2 ? right : 0.0;
  g.d_q.resize(pair.g.values.size());
  for (std::size_t k = 0; k < g.d_q.size(); ++k) g.d_q[k] = pair.g.values[k] * pair.g.values[k];
  return g;
}

// Per-entry forward results of one evaluation.
struct Residual {
  SpectralEntry entry;
  double lambda = 0.0;  // trial eigenvalue
  double residual() const { return lambda - entry.lambda; }
};

inline std::vector<Residual> residuals(const ProblemVector& pv, const SpectralTarget& target,
                                       const ForwardOptions& opts = {}) {
  std::vector<Residual> out;
  out.reserve(target.size());
  for (const auto& e : target.entries())
    out.push_back({e, solve_eigenvalue(pv.q(), pv.robin(e.i), e.n, opts)});
  return out;
}

inline double eval_G(const ProblemVector& pv, const SpectralTarget& target,
                     const ForwardOptions& opts = {}) {
  if (target.empty()) throw ValidationError("eval_G: empty target");
  double G = 0.0;
  for (const auto& r : residuals(pv, target, opts)) {
    const double d = r.residual();
    G += r.entry.weight * d * d;
  }
  return G;
}

struct ObjectiveValue {
  double G = 0.0;
  GradientVector grad;
};

inline ObjectiveValue eval_grad_G(const ProblemVector& pv, const SpectralTarget& target,
                                  const ForwardOptions& opts = {}) {
  if (target.empty()) throw ValidationError("eval_grad_G: empty target");
  ObjectiveValue out;
  out.grad = GradientVector::zero(pv.grid_size());
  // Same summation order as eval_G so that G agrees bit for bit.
  for (const auto& e : target.entries()) {
    const RobinPair bc = pv.robin(e.i);
    const double lambda = solve_eigenvalue(pv.q(), bc, e.n, opts);
    const double d = lambda - e.lambda;
    out.G += e.weight * d * d;
    const Eigenpair pair = solve_eigenfunction(pv.q(), bc, lambda, e.n);
    out.grad.axpy(2.0 * e.weight * d, eigen_gradient(pair, e.i));
  }
  if (!out.grad.all_finite()) throw SolverError("gradient has non-finite entries");
  return out;
}

}  // namespace slinv
