#pragma once

// Polak-Ribiere (PR+) conjugate-gradient descent on (h0, h1, h2, q) with a
// derivative-free line search and an optional schedule of potential resets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slinv/error.hpp"
#include "slinv/objective.hpp"

namespace slinv {

struct LineSearchConfig {
  double initial_step = 1e-3;  // divided by (1 + |direction|)
  double growth = 2.0;         // bracket expansion/contraction factor
  double rel_tol = 1e-3;       // relative bracket width at which refinement stops
  int max_evals = 40;
};

struct DescentConfig {
  int max_iters = 200;
  double g_tol = 1e-10;
  std::vector<int> reset_schedule;  // iterations whose q is zeroed afterwards
  LineSearchConfig line_search;
  int restart_every = 0;   // 0: never force a restart, 1: steepest descent
  int snapshot_every = 0;  // 0: no q snapshots

  void validate() const {
    if (max_iters < 1) throw ValidationError("DescentConfig: max_iters must be >= 1");
    if (!(g_tol > 0.0)) throw ValidationError("DescentConfig: g_tol must be positive");
    for (std::size_t k = 0; k < reset_schedule.size(); ++k) {
      if (reset_schedule[k] < 1) throw ValidationError("DescentConfig: reset iterations must be >= 1");
      if (k > 0 && reset_schedule[k] <= reset_schedule[k - 1])
        throw ValidationError("DescentConfig: reset_schedule must be strictly increasing");
    }
    if (restart_every < 0 || snapshot_every < 0)
      throw ValidationError("DescentConfig: negative restart/snapshot period");
    const auto& ls = line_search;
    if (!(ls.initial_step > 0.0) || !(ls.growth > 1.0) || !(ls.rel_tol > 0.0) || ls.max_evals < 3)
      throw ValidationError("DescentConfig: invalid line search settings");
  }

  bool resets_at(int iter) const {
    return std::binary_search(reset_schedule.begin(), reset_schedule.end(), iter);
  }
};

enum class IterateEvent { None, Reset, Restart, Converged, Failed };

inline std::string to_string(IterateEvent e) {
  switch (e) {
    case IterateEvent::None: return "none";
    case IterateEvent::Reset: return "reset";
    case IterateEvent::Restart: return "restart";
    case IterateEvent::Converged: return "converged";
    case IterateEvent::Failed: return "failed";
  }
  return "?";
}

struct IterateRecord {
  int iter = 0;
  double G = 0.0;
  double h0 = 0.0, h1 = 0.0, h2 = 0.0;
  std::optional<double> delta2;
  std::optional<Potential> q_snapshot;
  double bc_change = 0.0;  // max |h^(j) - h^(j-1)| over the three parameters
  IterateEvent event = IterateEvent::None;
};

enum class StopReason { Converged, MaxIters, StepFailure, SolverFailure, Stopped };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::StepFailure: return "step_failure";
    case StopReason::SolverFailure: return "solver_failure";
    case StopReason::Stopped: return "stopped";
  }
  return "?";
}

struct DescentResult {
  std::vector<IterateRecord> history;
  ProblemVector final_state;
  StopReason reason = StopReason::MaxIters;
  std::string message;
  long evaluations = 0;  // calls of G (with or without gradient)
};

// Called after every recorded iterate; returning false stops the descent.
using DescentObserver = std::function<bool(const IterateRecord&, const ProblemVector&)>;

struct LineSearchResult {
  double alpha = 0.0;
  double value = 0.0;
  int evals = 0;
};

// Minimizes phi over alpha > 0 given phi(0) = phi0: geometric bracketing from
// alpha0, then Brent's golden-section/parabolic refinement. Throws
// StepFailure when no alpha with phi(alpha) < phi0 is found.
template <class Phi>
LineSearchResult line_minimize(Phi&& phi, double phi0, double alpha0, const LineSearchConfig& cfg) {
  int evals = 0;
  auto f = [&](double a) {
    ++evals;
    const double v = phi(a);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  double a = 0.0, fa = phi0;
  double b = alpha0, fb = f(b);
  double c, fc;
  if (fb < fa) {
    c = b * cfg.growth;
    fc = f(c);
    while (fc < fb && evals < cfg.max_evals) {
      a = b, fa = fb;
      b = c, fb = fc;
      c = b * cfg.growth;
      fc = f(c);
    }
    if (fc < fb) return {c, fc, evals};  // budget exhausted while still descending
  } else {
    c = b, fc = fb;
    for (;;) {
      if (evals >= cfg.max_evals) {
        std::ostringstream msg;
        msg << "line search found no decrease (last alpha " << c << ")";
        throw StepFailure(msg.str(), c);
      }
      b = c / cfg.growth;
      fb = f(b);
      if (fb < fa) break;
      c = b, fc = fb;
    }
  }

  // Brent on [a, c] around b.
  constexpr double kGold = 0.3819660112501051;
  double lo = std::min(a, c), hi = std::max(a, c);
  double x = b, w = b, v = b, fx = fb, fw = fb, fv = fb;
  double d = 0.0, e = 0.0;
  while (evals < cfg.max_evals) {
    const double xm = 0.5 * (lo + hi);
    const double tol1 = cfg.rel_tol * std::abs(x) * 0.5 + 1e-300;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (hi - lo)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (lo - x) || p >= q * (hi - x))) {
        d = p / q;
        const double u = x + d;
        if (u - lo < tol2 || hi - u < tol2) d = std::copysign(tol1, xm - x);
        golden = false;
      }
    }
    if (golden) {
      e = (x >= xm) ? lo - x : hi - x;
      d = kGold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
    const double fu = f(u);
    if (fu <= fx) {
      (u >= x ? lo : hi) = x;
      v = w, fv = fw;
      w = x, fw = fx;
      x = u, fx = fu;
    } else {
      (u < x ? lo : hi) = u;
      if (fu <= fw || w == x) {
        v = w, fv = fw;
        w = u, fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u, fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

// (h0, h1, h2, 0): boundary parameters kept bit for bit.
inline ProblemVector reset_potential(const ProblemVector& pv) {
  return pv.with_potential(Potential::zero(pv.grid_size()));
}

namespace detail {

inline IterateRecord make_record(int iter, double G, const ProblemVector& pv,
                                 const std::optional<Potential>& reference,
                                 const IterateRecord* prev, int snapshot_every) {
  IterateRecord r;
  r.iter = iter;
  r.G = G;
  r.h0 = pv.h0();
  r.h1 = pv.h1();
  r.h2 = pv.h2();
  if (reference) r.delta2 = l2_distance(pv.q(), *reference);
  if (snapshot_every > 0 && iter % snapshot_every == 0) r.q_snapshot = pv.q();
  if (prev)
    r.bc_change = std::max({std::abs(r.h0 - prev->h0), std::abs(r.h1 - prev->h1),
                            std::abs(r.h2 - prev->h2)});
  return r;
}

inline double safe_G(const ProblemVector& pv, const SpectralTarget& target) {
  try {
    return eval_G(pv, target);
  } catch (const SolverError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const ValidationError&) {
    // e.g. the step collapsed h1 onto h2
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace detail

struct StepResult {
  ProblemVector pv;
  IterateRecord record;
  bool converged = false;
  double alpha = 0.0;
};

// One steepest-descent step pv - alpha* grad G with alpha* from the line search.
inline StepResult steepest_descent_step(const ProblemVector& pv, const SpectralTarget& target,
                                        const DescentConfig& cfg, int iter = 1) {
  const ObjectiveValue obj = eval_grad_G(pv, target);
  const double gnorm = norm(obj.grad);
  if (obj.G == 0.0 || gnorm == 0.0) {
    auto rec = detail::make_record(iter - 1, obj.G, pv, std::nullopt, nullptr, 0);
    rec.event = IterateEvent::Converged;
    return {pv, rec, true, 0.0};
  }
  const GradientVector dir = obj.grad.scaled(-1.0);
  const auto ls = line_minimize(
      [&](double a) { return detail::safe_G(displaced(pv, a, dir), target); }, obj.G,
      cfg.line_search.initial_step / (1.0 + gnorm), cfg.line_search);
  ProblemVector next = displaced(pv, ls.alpha, dir);
  auto rec = detail::make_record(iter, ls.value, next, std::nullopt, nullptr, 0);
  rec.bc_change = std::max({std::abs(next.h0() - pv.h0()), std::abs(next.h1() - pv.h1()),
                            std::abs(next.h2() - pv.h2())});
  return {std::move(next), rec, false, ls.alpha};
}

// Polak-Ribiere CG with beta = max(0, <g1, g1 - g0> / <g0, g0>). Iterate j is
// the state after j line searches; when j is in the reset schedule its
// potential is zeroed before recording and the direction restarts.
inline DescentResult pr_cg_minimize(const ProblemVector& pv0, const SpectralTarget& target,
                                    const DescentConfig& cfg,
                                    const std::optional<Potential>& reference = std::nullopt,
                                    const DescentObserver& observer = {}) {
  cfg.validate();
  if (target.empty()) throw ValidationError("pr_cg_minimize: empty target");

  DescentResult res{{}, pv0, StopReason::MaxIters, {}, 0};
  ProblemVector pv = pv0;
  ObjectiveValue obj = eval_grad_G(pv, target);
  ++res.evaluations;

  auto push = [&](IterateRecord rec) {
    res.history.push_back(std::move(rec));
    return !observer || observer(res.history.back(), pv);
  };

  if (!push(detail::make_record(0, obj.G, pv, reference, nullptr, cfg.snapshot_every))) {
    res.reason = StopReason::Stopped;
    return res;
  }

  GradientVector dir = obj.grad.scaled(-1.0);
  bool steepest = true;
  bool failed_once = false;
  int iter = 1;
  while (iter <= cfg.max_iters) {
    if (obj.G < cfg.g_tol || norm(obj.grad) == 0.0) {
      res.reason = StopReason::Converged;
      res.history.back().event = IterateEvent::Converged;
      break;
    }
    if (inner(dir, obj.grad) >= 0.0) {
      dir = obj.grad.scaled(-1.0);
      steepest = true;
    }

    LineSearchResult ls;
    try {
      ls = line_minimize(
          [&](double a) { return detail::safe_G(displaced(pv, a, dir), target); }, obj.G,
          cfg.line_search.initial_step / (1.0 + norm(dir)), cfg.line_search);
      res.evaluations += ls.evals;
    } catch (const StepFailure& f) {
      res.evaluations += cfg.line_search.max_evals;
      if (!failed_once && !steepest) {
        failed_once = true;
        dir = obj.grad.scaled(-1.0);
        steepest = true;
        continue;
      }
      res.reason = StopReason::StepFailure;
      res.message = f.what();
      res.history.back().event = IterateEvent::Failed;
      break;
    }

    ProblemVector next = displaced(pv, ls.alpha, dir);
    ObjectiveValue next_obj;
    try {
      next_obj = eval_grad_G(next, target);
      ++res.evaluations;
    } catch (const SolverError& err) {
      res.reason = StopReason::SolverFailure;
      res.message = err.what();
      res.history.back().event = IterateEvent::Failed;
      break;
    }

    IterateEvent event = failed_once ? IterateEvent::Restart : IterateEvent::None;
    failed_once = false;
    if (cfg.resets_at(iter)) {
      next = reset_potential(next);
      next_obj = eval_grad_G(next, target);
      ++res.evaluations;
      dir = next_obj.grad.scaled(-1.0);
      steepest = true;
      event = IterateEvent::Reset;
    } else {
      double beta = 0.0;
      const bool forced = cfg.restart_every > 0 && iter % cfg.restart_every == 0;
      if (!forced) {
        const double gg = inner(obj.grad, obj.grad);
        GradientVector diff = next_obj.grad;
        diff.axpy(-1.0, obj.grad);
        beta = std::max(0.0, inner(next_obj.grad, diff) / gg);
      }
      GradientVector nd = next_obj.grad.scaled(-1.0);
      nd.axpy(beta, dir);
      dir = std::move(nd);
      steepest = beta == 0.0;
    }

    const IterateRecord prev = res.history.back();
    pv = std::move(next);
    obj = std::move(next_obj);
    auto rec = detail::make_record(iter, obj.G, pv, reference, &prev, cfg.snapshot_every);
    rec.event = event;
    if (!push(std::move(rec))) {
      res.reason = StopReason::Stopped;
      ++iter;
      break;
    }
    ++iter;
  }
  if (res.reason == StopReason::MaxIters && obj.G < cfg.g_tol) {
    res.reason = StopReason::Converged;
    res.history.back().event = IterateEvent::Converged;
  }
  res.final_state = pv;
  return res;
}

// Index into `history` of the smallest delta2, if any record carries one.
inline std::optional<std::size_t> best_delta2(const std::vector<IterateRecord>& history,
                                              std::size_t first = 0,
                                              std::size_t last = std::numeric_limits<std::size_t>::max()) {
  std::optional<std::size_t> best;
  for (std::size_t k = first; k < history.size() && k <= last; ++k) {
    if (!history[k].delta2) continue;
    if (!best || *history[k].delta2 < *history[*best].delta2) best = k;
  }
  return best;
}

}  // namespace slinv
