#pragma once

// Two-phase driver: identification (projected gradient) phases alternate
// with minimization phases on the current face until the stationarity
// measure passes the tolerance. The minimization phase keeps going while the
// iterate stays proportional (gpcg-like variant: while every active variable
// is binding); it can only add active variables. A nonpositive-curvature
// direction triggers a step to the first breakpoint, or an unboundedness
// certificate when no bound stops the ray. The pure projected-BB solver
// (pabbmin) reuses the gradient-projection iteration with an adaptive
// steplength switch and no phases.

#include "identification.hpp"
#include "reduced.hpp"

namespace slbqp {

enum class SolveStatus { converged, unbounded, stalled, limit_matvecs, limit_projections };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::stalled: return "stalled";
    case SolveStatus::limit_matvecs: return "limit_matvecs";
    case SolveStatus::limit_projections: return "limit_projections";
  }
  return "?";
}

struct PhaseTraceEntry {
  char phase = '?';  // 'I' identification, 'M' minimization, 'G' plain gradient projection
  int iterations = 0;
  double f_drop = 0.0;
  int actives = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::stalled;
  Vec x;
  double f = 0.0;
  double kkt_measure = 0.0;      // ||phi + beta||_2 at exit
  double kkt_measure_inf = 0.0;  // ||phi + beta||_inf at exit
  Counters counters;
  int outer_iterations = 0;
  std::vector<PhaseTraceEntry> trace;
  MultiplierEstimate multipliers;
  Vec ray;  // certificate when status == unbounded
  double gamma_final = 0.0;
};

// Adaptive proportionality threshold: grow on a disproportional iterate,
// shrink (never below 1) when the active set moved while proportional.
inline double update_gamma(double gamma, bool proportional, bool active_changed) {
  if (!proportional) return std::max(1.1 * gamma, 1.0);
  if (active_changed) return std::max(0.9 * gamma, 1.0);
  return gamma;
}

namespace detail {

inline void snap_to_bounds(const Problem& p, Vec& x) {
  for (int i = 0; i < p.n; ++i) {
    if (x[i] < p.l[i]) x[i] = p.l[i];
    if (x[i] > p.u[i]) x[i] = p.u[i];
    if (at_lower_bound(x[i], p.l[i]))
      x[i] = p.l[i];
    else if (at_upper_bound(x[i], p.u[i]))
      x[i] = p.u[i];
  }
}

inline bool within_bounds_slack(const Problem& p, const Vec& x) {
  for (int i = 0; i < p.n; ++i) {
    if (p.l[i] > -kInf && p.l[i] - x[i] > kBoundAttachTol * std::max(1.0, std::abs(p.l[i])))
      return false;
    if (p.u[i] < kInf && x[i] - p.u[i] > kBoundAttachTol * std::max(1.0, std::abs(p.u[i])))
      return false;
  }
  return true;
}

inline SolveStatus limit_status(const Caps& caps, const Counters& cnt) {
  return cnt.matvecs >= caps.max_matvecs ? SolveStatus::limit_matvecs
                                         : SolveStatus::limit_projections;
}

struct ReportBuilder {
  SolveReport rep;

  SolveReport finish(SolveStatus status, const Vec& x, const GradientSplit& sp, Counters& cnt,
                     double gamma) {
    rep.status = status;
    rep.x = x;
    rep.f = sp.f;
    rep.kkt_measure = sp.measure;
    rep.kkt_measure_inf = sp.measure_inf;
    rep.counters = cnt;
    rep.multipliers = multiplier_estimates(sp.sets, sp.h, sp.rho);
    rep.gamma_final = gamma;
    return std::move(rep);
  }
};

}  // namespace detail

inline SolveReport solve_pabbmin(const Problem& p, Vec x, const SolverConfig& cfg, Counters& cnt,
                                 GradientSplit sp, const ConvergeTest& conv) {
  detail::ReportBuilder rb;
  SteplengthMemory mem(cfg.bb_window);
  StallTracker stall;
  double tau = cfg.ptau0;
  const double f0 = sp.f;
  int iters = 0;

  SolveStatus status = SolveStatus::stalled;
  for (;;) {
    if (conv.ok(sp)) {
      status = SolveStatus::converged;
      break;
    }
    if (!budget_left(cfg.caps, cnt)) {
      status = detail::limit_status(cfg.caps, cnt);
      break;
    }
    const bool had_pair = mem.has_pair();
    detail::GpStepResult st = detail::gp_step(p, x, sp, mem, tau, cfg, cnt, stall);
    ++iters;
    if (st.status == detail::GpStepStatus::unbounded) {
      rb.rep.ray = st.ray;
      status = SolveStatus::unbounded;
      break;
    }
    if (stall.tripped()) {
      status = SolveStatus::stalled;
      break;
    }
    if (had_pair) {
      tau = st.min_branch ? cfg.ptau_shrink * tau : std::min(cfg.ptau_grow * tau, cfg.ptau_max);
      tau = std::min(std::max(tau, cfg.ptau_min), cfg.ptau_max);
    }
  }
  rb.rep.outer_iterations = iters;
  rb.rep.trace.push_back({'G', iters, f0 - sp.f, sp.sets.active_count()});
  return rb.finish(status, x, sp, cnt, 0.0);
}

inline SolveReport solve(const Problem& p, Vec x0, const SolverConfig& cfg) {
  validate(p);
  if (x0.size() != static_cast<std::size_t>(p.n))
    throw std::invalid_argument("solve: x0 length mismatch");
  if (cfg.mode == Mode::p2gp_sdc && cfg.sdc_kbar < 2)
    throw std::invalid_argument("solve: sdc_kbar must be >= 2");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");

  Counters cnt;
  Vec x = project(p, x0, cnt, cfg.proj);
  detail::snap_to_bounds(p, x);
  GradientSplit sp = split(p, x, cnt, cfg.proj);
  const ConvergeTest conv = ConvergeTest::from_initial(cfg, sp);

  if (cfg.mode == Mode::pabbmin) return solve_pabbmin(p, std::move(x), cfg, cnt, std::move(sp), conv);

  detail::ReportBuilder rb;
  if (conv.ok(sp)) return rb.finish(SolveStatus::converged, x, sp, cnt, cfg.gamma0);

  const bool gpcg = cfg.mode == Mode::gpcg_like;
  const double xi = gpcg ? cfg.xi_gpcg_like : cfg.xi;
  double gamma = cfg.gamma0;
  SteplengthMemory mem(cfg.bb_window);
  StallTracker stall;
  InnerState inner;
  SolveStatus status = SolveStatus::stalled;

  for (;;) {
    if (!budget_left(cfg.caps, cnt)) {
      status = detail::limit_status(cfg.caps, cnt);
      break;
    }
    ++rb.rep.outer_iterations;

    // ---- identification phase ----
    Phase1Outcome ph1 = run_phase1(p, x, sp, mem, cfg, conv, cnt, stall);
    rb.rep.trace.push_back({'I', ph1.iterations, ph1.f_drop, sp.sets.active_count()});
    if (ph1.status == Phase1Status::converged) {
      status = SolveStatus::converged;
      break;
    }
    if (ph1.status == Phase1Status::unbounded) {
      rb.rep.ray = std::move(ph1.ray);
      status = SolveStatus::unbounded;
      break;
    }
    if (stall.tripped()) {
      status = SolveStatus::stalled;
      break;
    }
    if (!budget_left(cfg.caps, cnt)) {
      status = detail::limit_status(cfg.caps, cnt);
      break;
    }

    // ---- minimization phase ----
    bool phase2 = true;
    bool resume = false;
    bool done = false;
    int used = 0;
    int m_iters = 0;
    const double f_enter = sp.f;

    while (phase2) {
      if (!budget_left(cfg.caps, cnt)) {
        status = detail::limit_status(cfg.caps, cnt);
        done = true;
        break;
      }
      ReducedProblem red = build_reduced(p, sp.grad, sp.sets);
      if (!resume) inner.valid = false;
      InnerOutcome io = (cfg.mode == Mode::p2gp_sdc)
                            ? sdc_minimize(red, inner, xi, cfg.sdc_kbar, cfg.sdc_ell,
                                           cfg.caps.max_consecutive - used, cnt)
                            : cg_minimize(red, inner, xi, cfg.caps.max_consecutive - used, cnt);
      used += io.iterations;
      m_iters += io.iterations;
      const ActiveSets before = sp.sets;

      if (io.status == InnerStatus::nonpositive_curvature) {
        // Ride the ray to the first bound; no bound means unbounded below.
        const Breakpoints bp = breakpoints(p, x, io.d);
        if (bp.t_min == kInf) {
          rb.rep.ray = std::move(io.d);
          status = SolveStatus::unbounded;
          done = true;
          break;
        }
        axpy(bp.t_min, io.d, x);
        detail::snap_to_bounds(p, x);
        sp = split(p, x, cnt, cfg.proj);
        inner.valid = false;
        phase2 = false;
        if (conv.ok(sp)) {
          status = SolveStatus::converged;
          done = true;
          break;
        }
        if (cfg.adaptive_gamma && !gpcg)
          gamma = update_gamma(gamma, is_proportional(sp, gamma), !(sp.sets == before));
        continue;
      }

      if (io.status == InnerStatus::exact_solution && norm_inf(io.z) == 0.0) {
        // The face is already optimal; only the identification phase can
        // change it, so hand control back.
        inner.valid = false;
        break;
      }

      bool full_step = false;
      Vec cand = x;
      axpy(1.0, io.d, cand);
      if (detail::within_bounds_slack(p, cand)) {
        detail::snap_to_bounds(p, cand);
        x = std::move(cand);
        full_step = true;
        stall.record(true);
      } else {
        const BoxLinearSet face = face_set(p, sp.sets);
        auto proj = [&](const Vec& v) { return project(face, v, cnt, cfg.proj); };
        LineSearchResult ls =
            line_search_along(p, x, sp.f, sp.grad, io.d, 1.0, cfg.ls, proj, cnt);
        stall.record(ls.satisfied);
        if (!ls.moved) {
          if (stall.tripped()) {
            status = SolveStatus::stalled;
            done = true;
            break;
          }
          inner.valid = false;
          break;  // no progress on this face, go identify
        }
        x = std::move(ls.x);
        detail::snap_to_bounds(p, x);
      }

      sp = split(p, x, cnt, cfg.proj);
      if (conv.ok(sp)) {
        status = SolveStatus::converged;
        done = true;
        break;
      }
      const bool active_changed = !(sp.sets == before);
      const bool prop = gpcg ? binding_equals_active(sp.sets, sp.h) : is_proportional(sp, gamma);
      if (cfg.adaptive_gamma && !gpcg) gamma = update_gamma(gamma, prop, active_changed);
      phase2 = prop && used < cfg.caps.max_consecutive;
      resume = phase2 && full_step && !active_changed &&
               (io.status == InnerStatus::progress_stop || io.status == InnerStatus::iter_cap);
    }

    rb.rep.trace.push_back({'M', m_iters, f_enter - sp.f, sp.sets.active_count()});
    if (done) break;
    if (stall.tripped()) {
      status = SolveStatus::stalled;
      break;
    }
  }
  return rb.finish(status, x, sp, cnt, gamma);
}

}  // namespace slbqp
