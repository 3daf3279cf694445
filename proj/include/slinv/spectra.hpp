#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slinv/error.hpp"
#include "slinv/forward.hpp"
#include "slinv/grid.hpp"
#include "slinv/objective.hpp"

namespace slinv {

// SplitMix64 (Steele, Lea, Flood), reproducible across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct NoiseSpec {
  double r = 0.0;
  std::uint64_t seed = 0;
};

enum class PotentialKind { BenchStepRamp, SmoothDefault, Zero, CustomGrid };

inline std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::BenchStepRamp: return "bench_step_ramp";
    case PotentialKind::SmoothDefault: return "smooth_default";
    case PotentialKind::Zero: return "zero";
    case PotentialKind::CustomGrid: return "custom_grid";
  }
  return "?";
}

inline std::optional<PotentialKind> parse_potential_kind(const std::string& s) {
  if (s == "bench_step_ramp") return PotentialKind::BenchStepRamp;
  if (s == "smooth_default") return PotentialKind::SmoothDefault;
  if (s == "zero") return PotentialKind::Zero;
  if (s == "custom_grid") return PotentialKind::CustomGrid;
  return std::nullopt;
}

// Discontinuous benchmark: ramp up on (0.1,0.3], ramp down on (0.3,0.5],
// step of 4 on (0.7,0.9], step of 2 on (0.9,1].
inline double bench_step_ramp(double x) {
  if (x > 0.1 && x <= 0.3) return 7.0 * x - 0.7;
  if (x > 0.3 && x <= 0.5) return 3.5 - 7.0 * x;
  if (x > 0.7 && x <= 0.9) return 4.0;
  if (x > 0.9 && x <= 1.0) return 2.0;
  return 0.0;
}

// Smooth test potential for the smooth-reconstruction experiment:
// 3 sin^2(pi x), vanishing with zero slope at both ends.
inline double smooth_default(double x) {
  const double s = std::sin(std::numbers::pi * x);
  return 3.0 * s * s;
}

inline Potential make_potential(PotentialKind kind, std::size_t M) {
  switch (kind) {
    case PotentialKind::BenchStepRamp: return Potential::sample(M, bench_step_ramp);
    case PotentialKind::SmoothDefault: return Potential::sample(M, smooth_default);
    case PotentialKind::Zero: return Potential::zero(M);
    case PotentialKind::CustomGrid: break;
  }
  throw ValidationError("make_potential: custom_grid needs explicit values");
}

struct SpectralIndex {
  int i = 1;
  int n = 0;
};

// {1,2} x {n_min..n_max}, spectrum 1 first.
inline std::vector<SpectralIndex> two_spectra_indices(int n_min, int n_max) {
  std::vector<SpectralIndex> out;
  for (int i : {1, 2})
    for (int n = n_min; n <= n_max; ++n) out.push_back({i, n});
  return out;
}

// Exact spectra of `pv` over `indices`, perturbed by independent uniform
// noise on [-r, r] drawn in index order.
inline SpectralTarget generate_target(const ProblemVector& pv,
                                      const std::vector<SpectralIndex>& indices,
                                      const std::vector<double>& weights, const NoiseSpec& noise,
                                      const ForwardOptions& opts = {}) {
  if (!(noise.r >= 0.0)) throw ValidationError("noise magnitude must be nonnegative");
  if (!weights.empty() && weights.size() != indices.size())
    throw ValidationError("generate_target: weights/indices size mismatch");
  SplitMix64 rng(noise.seed);
  std::vector<SpectralEntry> entries;
  entries.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto [i, n] = indices[k];
    double lambda = solve_eigenvalue(pv.q(), pv.robin(i), n, opts);
    if (noise.r > 0.0) lambda += noise.r * (2.0 * rng.uniform() - 1.0);
    entries.push_back({i, n, lambda, weights.empty() ? 1.0 : weights[k]});
  }
  return SpectralTarget(std::move(entries));
}

inline SpectralTarget generate_target(const ProblemVector& pv,
                                      const std::vector<SpectralIndex>& indices,
                                      const NoiseSpec& noise = {}) {
  return generate_target(pv, indices, {}, noise);
}

enum class Interlacing { OneFirst, TwoFirst };

struct InterlacingReport {
  bool passed = false;
  std::optional<Interlacing> ordering;  // set when passed
  int n_first = 0;
  int n_last = 0;
  int violation_n = -1;  // first n where the expected ordering breaks
  std::string message;
};

// Checks l1[n] < l2[n] < l1[n+1] (or the mirrored ordering) over the common
// contiguous index range of both spectra.
inline InterlacingReport check_interlacing(const SpectralTarget& target) {
  std::vector<std::optional<double>> l1, l2;
  int lo = INT32_MAX, hi = -1;
  for (const auto& e : target.entries()) {
    lo = std::min(lo, e.n);
    hi = std::max(hi, e.n);
  }
  if (hi < 0) throw ValidationError("check_interlacing: empty target");
  l1.resize(hi + 1);
  l2.resize(hi + 1);
  for (const auto& e : target.entries()) (e.i == 1 ? l1 : l2)[e.n] = e.lambda;
  for (int n = lo; n <= hi; ++n)
    if (!l1[n] || !l2[n]) {
      std::ostringstream msg;
      msg << "check_interlacing: spectra do not share a contiguous index range (missing n=" << n
          << ")";
      throw ValidationError(msg.str());
    }

  auto first_violation = [&](const auto& a, const auto& b) {
    for (int n = lo; n <= hi; ++n) {
      if (!(*a[n] < *b[n])) return n;
      if (n < hi && !(*b[n] < *a[n + 1])) return n;
    }
    return -1;
  };

  InterlacingReport rep;
  rep.n_first = lo;
  rep.n_last = hi;
  const int v1 = first_violation(l1, l2);
  const int v2 = first_violation(l2, l1);
  if (v1 < 0) {
    rep.passed = true;
    rep.ordering = Interlacing::OneFirst;
  } else if (v2 < 0) {
    rep.passed = true;
    rep.ordering = Interlacing::TwoFirst;
  } else {
    // Report against the ordering suggested by the lowest index.
    rep.violation_n = (*l1[lo] < *l2[lo]) ? v1 : v2;
    std::ostringstream msg;
    msg << "interlacing violated at n=" << rep.violation_n;
    rep.message = msg.str();
  }
  return rep;
}

// a_n = lambda_{i,n} - pi^2 n^2 - 2 (h_i - h0) - int q, in target order.
inline std::vector<double> asymptotic_remainders(const SpectralTarget& target,
                                                 const ProblemVector& hypothesis) {
  const double mean = hypothesis.q().mean();
  std::vector<double> out;
  out.reserve(target.size());
  for (const auto& e : target.entries()) {
    const double pn = std::numbers::pi * e.n;
    out.push_back(e.lambda - pn * pn - 2.0 * (hypothesis.h_right(e.i) - hypothesis.h0()) - mean);
  }
  return out;
}

}  // namespace slinv
