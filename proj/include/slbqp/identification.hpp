#pragma once

// Identification phase: projected-gradient iterations with ABBmin seeds.
// The phase runs until the active set repeats, progress falls under the eta
// fraction of the best decrease this phase, the iterate converges, the
// problem proves unbounded, or the per-phase iteration cap is hit.
//
// Seed fallback when ABBmin is undefined or nonpositive (also at the first
// iterate of a phase, where no step pair exists yet): probe the curvature of
// the projected gradient direction pg (one counted matvec). If pg'H pg <= 0
// the objective decreases along the whole feasible part of the ray x + t*pg;
// when no bound ever stops the ray the problem is unbounded, otherwise the
// largest finite breakpoint seeds the backtracking search. With positive
// curvature the exact minimizer ||pg||^2 / pg'Hpg seeds it instead.

#include "config.hpp"
#include "projection.hpp"

namespace slbqp {

enum class Phase1Status { active_set_settled, progress_stalled, converged, unbounded, iter_cap };

struct Phase1Outcome {
  Phase1Status status = Phase1Status::iter_cap;
  int iterations = 0;
  double f_drop = 0.0;
  Vec ray;  // feasible descent ray with nonpositive curvature, set iff unbounded
};

namespace detail {

enum class GpStepStatus { stepped, unbounded, exhausted };

struct GpStepResult {
  GpStepStatus status = GpStepStatus::stepped;
  double f_prev = 0.0;
  bool min_branch = false;  // ABBmin took the min-of-bb2 branch
  Vec ray;
};

// One projected-gradient iteration: seed, line search along -grad onto the
// full feasible set, then a fresh split at the accepted point. Updates x and
// sp in place and pushes the step pair into the memory.
inline GpStepResult gp_step(const Problem& p, Vec& x, GradientSplit& sp, SteplengthMemory& mem,
                            double tau, const SolverConfig& cfg, Counters& cnt,
                            StallTracker& stall) {
  GpStepResult res;
  res.f_prev = sp.f;

  double alpha0;
  auto seed = mem.abbmin(tau);
  if (seed && *seed > 0.0) {
    alpha0 = *seed;
    res.min_branch = mem.min_branch(tau);
  } else {
    Vec hpg;
    hessian_apply(p, sp.pg, hpg, cnt);
    const double curv = dot(sp.pg, hpg);
    if (curv <= 0.0) {
      const Breakpoints bp = breakpoints(p, x, sp.pg);
      if (bp.t_min == kInf) {
        res.status = GpStepStatus::unbounded;
        res.ray = sp.pg;
        return res;
      }
      alpha0 = bp.t_max_finite;
    } else {
      alpha0 = dot(sp.pg, sp.pg) / curv;
    }
  }

  const BoxLinearSet omega = feasible_set(p);
  auto proj = [&](const Vec& v) { return project(omega, v, cnt, cfg.proj); };
  LineSearchResult lsres =
      sufficient_decrease_search(p, x, sp.f, sp.grad, alpha0, cfg.ls, proj, cnt);
  stall.record(lsres.satisfied);
  if (!lsres.moved) {
    res.status = GpStepStatus::exhausted;
    return res;
  }

  Vec s(p.n), g_old = sp.grad;
  for (int i = 0; i < p.n; ++i) s[i] = lsres.x[i] - x[i];
  x = std::move(lsres.x);
  sp = split(p, x, cnt, cfg.proj);
  Vec y(p.n);
  for (int i = 0; i < p.n; ++i) y[i] = sp.grad[i] - g_old[i];
  mem.push(s, y);
  if (!lsres.satisfied) res.status = GpStepStatus::exhausted;
  return res;
}

}  // namespace detail

inline Phase1Outcome run_phase1(const Problem& p, Vec& x, GradientSplit& sp,
                                SteplengthMemory& mem, const SolverConfig& cfg,
                                const ConvergeTest& conv, Counters& cnt, StallTracker& stall) {
  Phase1Outcome out;
  mem.reset();  // the ABBmin memory starts fresh each identification phase
  const double f_enter = sp.f;
  std::vector<double> drops;

  for (int it = 1; it <= cfg.caps.max_consecutive; ++it) {
    if (!budget_left(cfg.caps, cnt)) {
      out.status = Phase1Status::iter_cap;
      break;
    }
    const ActiveSets before = sp.sets;
    detail::GpStepResult st = detail::gp_step(p, x, sp, mem, cfg.bb_tau, cfg, cnt, stall);
    out.iterations = it;
    if (st.status == detail::GpStepStatus::unbounded) {
      out.status = Phase1Status::unbounded;
      out.ray = std::move(st.ray);
      break;
    }
    if (conv.ok(sp)) {
      out.status = Phase1Status::converged;
      break;
    }
    if (stall.tripped()) {
      out.status = Phase1Status::progress_stalled;
      break;
    }
    const double drop = st.f_prev - sp.f;
    if (sp.sets == before) {
      out.status = Phase1Status::active_set_settled;
      break;
    }
    if (!drops.empty() && drop <= cfg.eta * *std::max_element(drops.begin(), drops.end())) {
      out.status = Phase1Status::progress_stalled;
      break;
    }
    drops.push_back(drop);
    out.status = Phase1Status::iter_cap;  // reached only if the loop runs out
  }
  out.f_drop = f_enter - sp.f;
  return out;
}

}  // namespace slbqp
