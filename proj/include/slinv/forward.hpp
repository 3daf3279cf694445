#pragma once

// Forward Sturm-Liouville solver for
//
//   -u'' + q(x) u = lambda u   on [0,1],
//   h_left u(0) + u'(0) = 0,   h_right u(1) + u'(1) = 0.
//
// Eigenvalues are located by shooting on a scaled Pruefer phase
// (S u = rho sin(theta), u' = rho cos(theta)), which is
// strictly increasing in lambda and counts interior zeros of u, so the
// n-th eigenvalue is the unique root of theta(1; lambda) = theta_R + n pi.
// All ODEs are integrated by fixed-step classical RK4 on the potential's
// grid with q linearly interpolated between nodes.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "slinv/error.hpp"
#include "slinv/grid.hpp"

namespace slinv {

struct RobinPair {
  double h_left = 0.0;
  double h_right = 0.0;
};

struct ForwardOptions {
  // Newton/bisection stops when the update is below rel_tol * (1 + |lambda|).
  double rel_tol = 1e-12;
  int max_iter = 200;
};

struct Eigenpair {
  int index = 0;
  double lambda = 0.0;
  GridFunction g;  // normalized eigenfunction and its derivative
  double g0 = 0.0;
  double g1 = 0.0;
};

namespace detail {

struct PhaseState {
  double theta;
  double dtheta;  // d theta / d lambda
};

// Right-hand side of the scaled Pruefer system and its lambda-variation.
inline PhaseState phase_rhs(double theta, double dtheta, double lambda_minus_q, double scale) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double a = lambda_minus_q / scale;
  return {scale * c * c + a * s * s, 2.0 * (a - scale) * s * c * dtheta + s * s / scale};
}

inline PhaseState integrate_phase(const Potential& q, double lambda, double scale, double theta0) {
  const std::size_t M = q.grid_size();
  const double h = q.step();
  const auto qv = q.values();
  double th = theta0, dth = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    const double l0 = lambda - qv[k];
    const double l1 = lambda - qv[k + 1];
    const double lm = 0.5 * (l0 + l1);
    const auto k1 = phase_rhs(th, dth, l0, scale);
    const auto k2 = phase_rhs(th + 0.5 * h * k1.theta, dth + 0.5 * h * k1.dtheta, lm, scale);
    const auto k3 = phase_rhs(th + 0.5 * h * k2.theta, dth + 0.5 * h * k2.dtheta, lm, scale);
    const auto k4 = phase_rhs(th + h * k3.theta, dth + h * k3.dtheta, l1, scale);
    th += h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
    dth += h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  }
  return {th, dth};
}

// RK4 for (u, u') with u'' = (q - lambda) u, marching from one end of the
// grid to the other. `forward` selects the direction.
inline GridFunction integrate_linear(const Potential& q, double lambda, double u_start,
                                     double du_start, bool forward) {
  const std::size_t M = q.grid_size();
  const auto qv = q.values();
  const double h = forward ? q.step() : -q.step();
  GridFunction out;
  out.values.resize(M + 1);
  out.derivs.resize(M + 1);
  double u = u_start, v = du_start;
  std::size_t k = forward ? 0 : M;
  out.values[k] = u;
  out.derivs[k] = v;
  for (std::size_t step = 0; step < M; ++step) {
    const std::size_t next = forward ? k + 1 : k - 1;
    const double c0 = qv[k] - lambda;
    const double c1 = qv[next] - lambda;
    const double cm = 0.5 * (c0 + c1);
    const double ku1 = v, kv1 = c0 * u;
    const double ku2 = v + 0.5 * h * kv1, kv2 = cm * (u + 0.5 * h * ku1);
    const double ku3 = v + 0.5 * h * kv2, kv3 = cm * (u + 0.5 * h * ku2);
    const double ku4 = v + h * kv3, kv4 = c1 * (u + h * ku3);
    u += h / 6.0 * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
    v += h / 6.0 * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    k = next;
    out.values[k] = u;
    out.derivs[k] = v;
  }
  for (std::size_t j = 0; j <= M; ++j)
    if (!std::isfinite(out.values[j]) || !std::isfinite(out.derivs[j]))
      throw SolverError("initial value problem overflowed");
  return out;
}

inline double asymptotic_guess(const Potential& q, const RobinPair& bc, int n) {
  const double pn = std::numbers::pi * n;
  return pn * pn + 2.0 * (bc.h_right - bc.h_left) + q.mean();
}

}  // namespace detail

// n-th eigenvalue (n = number of interior zeros of the eigenfunction).
inline double solve_eigenvalue(const Potential& q, const RobinPair& bc, int n,
                               const ForwardOptions& opts = {}) {
  if (n < 0) throw ValidationError("solve_eigenvalue: index must be nonnegative");
  if (!std::isfinite(bc.h_left) || !std::isfinite(bc.h_right))
    throw ValidationError("solve_eigenvalue: Robin parameters must be finite");

  const double pn = std::numbers::pi * n;
  // The scale depends only on (n, bc) so a constant shift of q shifts the
  // whole computation by exactly that constant.
  const double scale = std::sqrt(std::max(pn * pn + 2.0 * (bc.h_right - bc.h_left), 1.0));
  const double theta0 = std::atan2(scale, -bc.h_left);
  const double target = std::atan2(scale, -bc.h_right) + pn;

  const double guess = detail::asymptotic_guess(q, bc, n);
  double width = 10.0 + std::abs(q.mean());
  std::optional<double> lo, hi;
  double lam = guess;

  for (int it = 0; it < opts.max_iter; ++it) {
    const auto ph = detail::integrate_phase(q, lam, scale, theta0);
    const double F = ph.theta - target;
    if (!std::isfinite(F)) break;
    if (F == 0.0) return lam;
    if (F < 0.0)
      lo = lam;
    else
      hi = lam;

    double next = (ph.dtheta > 0.0) ? lam - F / ph.dtheta : std::nan("");
    if (lo && hi) {
      if (!(next > *lo && next < *hi)) next = 0.5 * (*lo + *hi);
    } else if (lo) {
      // Only points below the root seen so far: move up, expanding the seed.
      if (!(next > lam) || next > lam + width) {
        next = lam + width;
        width *= 2.0;
      }
    } else {
      if (!(next < lam) || next < lam - width) {
        next = lam - width;
        width *= 2.0;
      }
    }

    const double tol = opts.rel_tol * (1.0 + std::abs(lam));
    if (std::abs(next - lam) <= tol) return next;
    if (lo && hi && (*hi - *lo) <= tol) return 0.5 * (*lo + *hi);
    lam = next;
  }

  std::ostringstream msg;
  msg << "eigenvalue " << n << " did not converge, bracket [" << lo.value_or(-INFINITY) << ", "
      << hi.value_or(INFINITY) << "]";
  throw SolverError(msg.str(), n, lo.value_or(-INFINITY), hi.value_or(INFINITY));
}

// Normalized eigenfunction at a (converged) eigenvalue. The left boundary
// condition is imposed exactly by the initial data u(0)=1, u'(0)=-h_left, so
// g(0) is 1/||u|| and g(1) is u(1)/||u||.
inline Eigenpair solve_eigenfunction(const Potential& q, const RobinPair& bc, double lambda, int n) {
  GridFunction u = detail::integrate_linear(q, lambda, 1.0, -bc.h_left, true);
  const double norm = trapz_norm(u.values);
  if (!(norm > 1e-200) || !std::isfinite(norm))
    throw SolverError("eigenfunction norm degenerate", n, lambda, lambda);
  const double inv = 1.0 / norm;
  for (double& v : u.values) v *= inv;
  for (double& v : u.derivs) v *= inv;
  Eigenpair p;
  p.index = n;
  p.lambda = lambda;
  p.g0 = inv;
  p.g1 = u.values.back();
  p.g = std::move(u);
  return p;
}

inline Eigenpair solve_eigenpair(const Potential& q, const RobinPair& bc, int n,
                                 const ForwardOptions& opts = {}) {
  return solve_eigenfunction(q, bc, solve_eigenvalue(q, bc, n, opts), n);
}

// Solution of -v'' + q v = lambda v with v(1) = v1, v'(1) = dv1.
inline GridFunction solve_ivp_backward(const Potential& q, double lambda, double v1, double dv1) {
  return detail::integrate_linear(q, lambda, v1, dv1, false);
}

// Solution of -v'' + q v = lambda v with v(0) = v0, v'(0) = dv0.
inline GridFunction solve_ivp_forward(const Potential& q, double lambda, double v0, double dv0) {
  return detail::integrate_linear(q, lambda, v0, dv0, true);
}

// Number of strict sign changes across the grid samples, ignoring exact zeros.
inline int sign_changes(std::span<const double> v) {
  int count = 0;
  double prev = 0.0;
  for (double x : v) {
    if (x == 0.0) continue;
    if (prev != 0.0 && (x > 0.0) != (prev > 0.0)) ++count;
    prev = x;
  }
  return count;
}

}  // namespace slinv
