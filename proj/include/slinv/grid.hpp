#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slinv/error.hpp"

namespace slinv {

// Uniform grid x_k = k/M on [0,1], endpoints included.
inline double grid_node(std::size_t k, std::size_t M) {
  return static_cast<double>(k) / static_cast<double>(M);
}

// Trapezoidal rule on the uniform grid spanned by `f` (M = f.size() - 1).
inline double trapz(std::span<const double> f) {
  if (f.size() < 2) return 0.0;
  const std::size_t M = f.size() - 1;
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k < M; ++k) acc += f[k];
  return acc / static_cast<double>(M);
}

// Trapezoidal L2 inner product.
inline double trapz_inner(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("trapz_inner: grid mismatch");
  if (a.size() < 2) return 0.0;
  const std::size_t M = a.size() - 1;
  double acc = 0.5 * (a.front() * b.front() + a.back() * b.back());
  for (std::size_t k = 1; k < M; ++k) acc += a[k] * b[k];
  return acc / static_cast<double>(M);
}

inline double trapz_norm(std::span<const double> a) { return std::sqrt(trapz_inner(a, a)); }

// Trapezoidal rule with fourth-order end corrections (end weights 3/8, 7/6,
// 23/24, interior weight 1). Falls back to trapz on grids with M < 6.
inline double trapz_corrected(std::span<const double> f) {
  if (f.size() < 7) return trapz(f);
  const std::size_t M = f.size() - 1;
  constexpr double w[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  double acc = 0.0;
  for (std::size_t k = 0; k < 3; ++k) acc += w[k] * (f[k] + f[M - k]);
  for (std::size_t k = 3; k <= M - 3; ++k) acc += f[k];
  return acc / static_cast<double>(M);
}

// Potential sampled at the M+1 nodes of the uniform grid.
class Potential {
 public:
  Potential() : values_(3, 0.0) {}

  explicit Potential(std::vector<double> values) : values_(std::move(values)) { validate(); }

  static Potential zero(std::size_t M) { return Potential(std::vector<double>(M + 1, 0.0)); }

  static Potential constant(std::size_t M, double c) {
    return Potential(std::vector<double>(M + 1, c));
  }

  static Potential sample(std::size_t M, const std::function<double(double)>& fn) {
    std::vector<double> v(M + 1);
    for (std::size_t k = 0; k <= M; ++k) v[k] = fn(grid_node(k, M));
    return Potential(std::move(v));
  }

  std::size_t grid_size() const noexcept { return values_.size() - 1; }
  std::size_t size() const noexcept { return values_.size(); }
  double step() const noexcept { return 1.0 / static_cast<double>(grid_size()); }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  double mean() const { return trapz(values_); }
  double l2_norm() const { return trapz_norm(values_); }

  // Piecewise-linear interpolation.
  double at(double x) const {
    const std::size_t M = grid_size();
    if (x <= 0.0) return values_.front();
    if (x >= 1.0) return values_.back();
    const double s = x * static_cast<double>(M);
    auto k = static_cast<std::size_t>(s);
    if (k >= M) k = M - 1;
    const double t = s - static_cast<double>(k);
    return (1.0 - t) * values_[k] + t * values_[k + 1];
  }

  Potential resampled(std::size_t M) const {
    if (M == grid_size()) return *this;
    return sample(M, [this](double x) { return at(x); });
  }

  Potential shifted(double c) const {
    std::vector<double> v = values_;
    for (double& x : v) x += c;
    return Potential(std::move(v));
  }

  bool operator==(const Potential&) const = default;

 private:
  void validate() const {
    if (values_.size() < 3) throw ValidationError("Potential: grid size M must be >= 2");
    for (double v : values_)
      if (!std::isfinite(v)) throw ValidationError("Potential: non-finite sample");
  }

  std::vector<double> values_;
};

// L2 distance, resampling `b` onto the grid of `a` when needed.
inline double l2_distance(const Potential& a, const Potential& b) {
  const Potential bb = b.resampled(a.grid_size());
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - bb[k];
  return trapz_norm(d);
}

// Grid samples of a function together with its derivative.
struct GridFunction {
  std::vector<double> values;
  std::vector<double> derivs;

  std::size_t grid_size() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

inline GridFunction product(const GridFunction& f, const GridFunction& g) {
  if (f.values.size() != g.values.size()) throw ValidationError("product: grid mismatch");
  GridFunction r;
  r.values.resize(f.values.size());
  r.derivs.resize(f.values.size());
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    r.values[k] = f.values[k] * g.values[k];
    r.derivs[k] = f.derivs[k] * g.values[k] + f.values[k] * g.derivs[k];
  }
  return r;
}

}  // namespace slinv
