#pragma once

// Numerical checks of the machinery behind the linear independence of
// eigenvalue gradients:
//
//   Gamma(f, g)        = int_0^1 (f g' - f' g) dx
//   Gamma~(f, (a,b,c,g)) = -2 int_0^1 f' g dx + f(1) b + f(1) c + f(0) a
//
// Integrals use the end-corrected trapezoidal rule: the integrands are
// exact derivatives whose plain trapezoidal error dominates at moderate M.
//
// with f = c_{i,n} s_{i,n}, the product of the solutions at lambda_{i,n}
// started at x=1 from (1, -h1) and (1, -h2), tested against squared
// normalized eigenfunctions and eigenvalue gradients.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "slinv/error.hpp"
#include "slinv/forward.hpp"
#include "slinv/grid.hpp"
#include "slinv/objective.hpp"

namespace slinv {

// Integral of the Wronskian; derivatives come from the integrator.
inline double gamma_form(const GridFunction& f, const GridFunction& g) {
  if (f.values.size() != g.values.size() || f.derivs.size() != f.values.size() ||
      g.derivs.size() != g.values.size())
    throw ValidationError("gamma_form: grid mismatch");
  std::vector<double> w(f.values.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = f.values[k] * g.derivs[k] - f.derivs[k] * g.values[k];
  return trapz_corrected(w);
}

inline double gamma_tilde(const GridFunction& f, const GradientVector& v) {
  if (f.values.size() != v.d_q.size() || f.derivs.size() != v.d_q.size())
    throw ValidationError("gamma_tilde: grid mismatch");
  std::vector<double> w(v.d_q.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = f.derivs[k] * v.d_q[k];
  return -2.0 * trapz_corrected(w) + f.values.back() * (v.d_h1 + v.d_h2) +
         f.values.front() * v.d_h0;
}

struct WronskianProbe {
  int i = 1;
  int n = 0;
  double lambda = 0.0;
  GridFunction s;  // s(1) = 1, s'(1) = -h1
  GridFunction c;  // c(1) = 1, c'(1) = -h2

  GridFunction cs() const { return product(c, s); }
};

inline WronskianProbe make_probe(const ProblemVector& pv, int i, int n, double lambda) {
  return {i, n, lambda, solve_ivp_backward(pv.q(), lambda, 1.0, -pv.h1()),
          solve_ivp_backward(pv.q(), lambda, 1.0, -pv.h2())};
}

// Diagonal value of Gamma(c s, g^2) at (i,n) = (j,m). The Wronskian
// c s' - c' s is constant and equals h2 - h1 (evaluate at x=1), which gives
// +(h2 - h1) for spectrum 1 and -(h2 - h1) for spectrum 2.
inline double lemma_diagonal(int i, double h1, double h2) {
  return (i == 1 ? 1.0 : -1.0) * (h2 - h1);
}

// The same entry with the opposite sign convention (-1)^i (h2 - h1).
inline double lemma_diagonal_alternate(int i, double h1, double h2) {
  return -lemma_diagonal(i, h1, h2);
}

enum class LemmaSign { Wronskian, Alternate };

struct LemmaReport {
  int N = 0;
  LemmaSign sign = LemmaSign::Wronskian;
  // Rows (i,n) and columns (j,m) are ordered spectrum 1 then 2, n ascending:
  // row index = (i-1)*(N+1) + n.
  std::vector<std::vector<double>> matrix;
  std::vector<std::vector<double>> expected;
  double max_deviation = 0.0;
  int worst_row = -1, worst_col = -1;

  bool passed(double tol) const { return max_deviation <= tol; }
};

inline LemmaReport lemma_biorthogonality(const ProblemVector& pv, int N,
                                         LemmaSign sign = LemmaSign::Wronskian,
                                         const ForwardOptions& opts = {}) {
  if (N < 0) throw ValidationError("lemma_biorthogonality: N must be nonnegative");
  const int size = 2 * (N + 1);
  std::vector<Eigenpair> pairs;
  std::vector<GridFunction> products;
  std::vector<GridFunction> squares;
  for (int i : {1, 2})
    for (int n = 0; n <= N; ++n) {
      Eigenpair p = solve_eigenpair(pv.q(), pv.robin(i), n, opts);
      products.push_back(make_probe(pv, i, n, p.lambda).cs());
      squares.push_back(product(p.g, p.g));
      pairs.push_back(std::move(p));
    }

  LemmaReport rep;
  rep.N = N;
  rep.sign = sign;
  rep.matrix.assign(size, std::vector<double>(size));
  rep.expected.assign(size, std::vector<double>(size, 0.0));
  for (int r = 0; r < size; ++r) {
    const int i = r / (N + 1) + 1;
    const double diag = sign == LemmaSign::Wronskian ? lemma_diagonal(i, pv.h1(), pv.h2())
                                                     : lemma_diagonal_alternate(i, pv.h1(), pv.h2());
    rep.expected[r][r] = diag;
    for (int col = 0; col < size; ++col) {
      rep.matrix[r][col] = gamma_form(products[r], squares[col]);
      const double dev = std::abs(rep.matrix[r][col] - rep.expected[r][col]);
      if (dev > rep.max_deviation || rep.worst_row < 0) {
        rep.max_deviation = std::max(rep.max_deviation, dev);
        rep.worst_row = r;
        rep.worst_col = col;
      }
    }
  }
  return rep;
}

struct BridgeReport {
  int i = 1, n = 0, j = 1, m = 0;
  double gamma = 0.0;        // Gamma(c s, g^2)
  double gamma_tilde = 0.0;  // Gamma~(c s, grad lambda)

  double difference() const { return std::abs(gamma - gamma_tilde); }
};

// Integration-by-parts bridge between Gamma on g^2 and Gamma~ on the gradient.
inline BridgeReport gamma_tilde_bridge(const ProblemVector& pv, int i, int n, int j, int m,
                                       const ForwardOptions& opts = {}) {
  const double lambda_in = solve_eigenvalue(pv.q(), pv.robin(i), n, opts);
  const GridFunction f = make_probe(pv, i, n, lambda_in).cs();
  const Eigenpair p = solve_eigenpair(pv.q(), pv.robin(j), m, opts);
  return {i, n, j, m, gamma_form(f, product(p.g, p.g)), gamma_tilde(f, eigen_gradient(p, j))};
}

// Every (i,n) x (j,m) pair with n, m <= N, sharing forward solves.
inline std::vector<BridgeReport> bridge_all(const ProblemVector& pv, int N,
                                            const ForwardOptions& opts = {}) {
  std::vector<GridFunction> products;
  std::vector<Eigenpair> pairs;
  std::vector<int> ids;
  for (int i : {1, 2})
    for (int n = 0; n <= N; ++n) {
      Eigenpair p = solve_eigenpair(pv.q(), pv.robin(i), n, opts);
      products.push_back(make_probe(pv, i, n, p.lambda).cs());
      pairs.push_back(std::move(p));
      ids.push_back(i);
    }
  std::vector<BridgeReport> out;
  for (std::size_t r = 0; r < pairs.size(); ++r)
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      const auto& p = pairs[c];
      out.push_back({ids[r], pairs[r].index, ids[c], p.index, gamma_form(products[r], product(p.g, p.g)),
                     gamma_tilde(products[r], eigen_gradient(p, ids[c]))});
    }
  return out;
}

// Gram matrix under the R^3 x L2 inner product.
inline Eigen::MatrixXd gram_matrix(std::span<const GradientVector> vs) {
  const auto n = static_cast<Eigen::Index>(vs.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) G(a, b) = G(b, a) = inner(vs[a], vs[b]);
  return G;
}

inline double gram_min_eigenvalue(std::span<const GradientVector> vs) {
  if (vs.empty()) throw ValidationError("gram_min_eigenvalue: no vectors");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_matrix(vs), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct IndependenceReport {
  int N = 0;
  Eigen::MatrixXd gram;
  double min_eigenvalue = 0.0;
  double determinant = 0.0;
};

inline std::vector<GradientVector> eigen_gradients(const ProblemVector& pv, int N,
                                                   const ForwardOptions& opts = {}) {
  std::vector<GradientVector> out;
  for (int i : {1, 2})
    for (int n = 0; n <= N; ++n)
      out.push_back(eigen_gradient(solve_eigenpair(pv.q(), pv.robin(i), n, opts), i));
  return out;
}

inline IndependenceReport independence_smoke(const ProblemVector& pv, int N,
                                             const ForwardOptions& opts = {}) {
  if (N < 0) throw ValidationError("independence_smoke: N must be nonnegative");
  const auto grads = eigen_gradients(pv, N, opts);
  IndependenceReport rep;
  rep.N = N;
  rep.gram = gram_matrix(grads);
  rep.min_eigenvalue = gram_min_eigenvalue(grads);
  rep.determinant = rep.gram.determinant();
  return rep;
}

}  // namespace slinv
