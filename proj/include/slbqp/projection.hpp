#pragma once

// Projection onto  {v : q'v = b, l <= v <= u}  and related pieces.
//
// With the constraint present, the projection of x is v(mu) = mid(l, x + mu*q, u)
// where mu solves the scalar equation r(mu) = q'v(mu) - b = 0. r is piecewise
// linear and nondecreasing in mu, so a bracketing phase (step doubling from
// mu = 0) followed by a secant iteration with bisection safeguards finds the
// root. Without the constraint the projection is the componentwise clamp.
//
// Components with l_i = u_i are pinned by mid() itself, which is what lets the
// same routine project onto faces (actives held at their bound values) and
// onto tangent cones (bounds 0 / +-inf, right-hand side 0).

#include <functional>

#include "problem.hpp"

namespace slbqp {

struct BoxLinearSet {
  std::optional<LinearConstraint> eq;
  Vec l, u;
};

struct ProjectionParams {
  double eps = 1e-10;        // accept |r(mu)| <= eps * (1 + |b|)
  double width_tol = 1e-14;  // accept bracket width <= width_tol * (1 + |mu|)
  int max_iters = 500;
};

struct ProjectStats {
  double mu = 0.0;
  int bracket_evals = 0;
  int secant_iters = 0;
  double residual = 0.0;
};

namespace detail {

inline double mid(double lo, double v, double hi) { return std::min(std::max(v, lo), hi); }

// r(mu) = q' mid(l, x + mu q, u) - b
inline double constraint_residual(const BoxLinearSet& s, const Vec& x, double mu) {
  const Vec& q = s.eq->q;
  double r = -s.eq->b;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (q[i] != 0.0) r += q[i] * mid(s.l[i], x[i] + mu * q[i], s.u[i]);
  return r;
}

// Range of q'v over the box, +-inf aware. Used to certify nonemptiness.
inline void attainable_range(const BoxLinearSet& s, double& lo, double& hi) {
  lo = 0.0;
  hi = 0.0;
  const Vec& q = s.eq->q;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) {
      lo += q[i] * s.l[i];
      hi += q[i] * s.u[i];
    } else if (q[i] < 0.0) {
      lo += q[i] * s.u[i];
      hi += q[i] * s.l[i];
    }
  }
}

}  // namespace detail

inline Vec project(const BoxLinearSet& s, const Vec& x, Counters& cnt,
                   const ProjectionParams& pp = {}, ProjectStats* stats = nullptr) {
  const int n = static_cast<int>(x.size());
  if (s.l.size() != x.size() || s.u.size() != x.size())
    throw std::invalid_argument("project: dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (s.l[i] > s.u[i]) throw ProjectionError("project: empty box (l > u)");
  ++cnt.projections;

  Vec v(n);
  if (!s.eq) {
    for (int i = 0; i < n; ++i) v[i] = detail::mid(s.l[i], x[i], s.u[i]);
    if (stats) *stats = ProjectStats{};
    return v;
  }

  const double b = s.eq->b;
  const double rtol = pp.eps * (1.0 + std::abs(b));
  double lo_att, hi_att;
  detail::attainable_range(s, lo_att, hi_att);
  if (b < lo_att - rtol || b > hi_att + rtol)
    throw ProjectionError("project: q'v = b unreachable over the box");

  ProjectStats st;
  auto finish = [&](double mu, double r) {
    st.mu = mu;
    st.residual = r;
    for (int i = 0; i < n; ++i) v[i] = detail::mid(s.l[i], x[i] + mu * s.eq->q[i], s.u[i]);
    if (stats) *stats = st;
    return v;
  };

  double mu = 0.0;
  double r = detail::constraint_residual(s, x, mu);
  ++st.bracket_evals;
  if (std::abs(r) <= rtol) return finish(mu, r);

  // Bracket the root: r is nondecreasing, walk away from 0 with doubling
  // steps until the sign changes. Feasibility was certified above, so a sign
  // change exists at finite mu unless b sits at the edge of the attainable
  // range, in which case |r| falls under tolerance on the way.
  double lo, hi, rlo, rhi;
  {
    double step = 1.0;
    double mu_prev = mu, r_prev = r;
    const int dir = (r > 0.0) ? -1 : +1;  // need smaller r -> decrease mu
    for (;;) {
      if (st.bracket_evals > pp.max_iters)
        throw ProjectionError("project: bracketing failed to find a sign change");
      const double mu_next = mu_prev + dir * step;
      const double r_next = detail::constraint_residual(s, x, mu_next);
      ++st.bracket_evals;
      if (std::abs(r_next) <= rtol) return finish(mu_next, r_next);
      if ((r_next > 0.0) != (r_prev > 0.0)) {
        lo = std::min(mu_prev, mu_next);
        hi = std::max(mu_prev, mu_next);
        rlo = (mu_prev < mu_next) ? r_prev : r_next;
        rhi = (mu_prev < mu_next) ? r_next : r_prev;
        break;
      }
      mu_prev = mu_next;
      r_prev = r_next;
      step *= 2.0;
    }
  }

  // Secant within [lo, hi] (r(lo) < 0 < r(hi)); bisection when the secant
  // step leaves the bracket or |r| fails to halve.
  double r_last = std::min(std::abs(rlo), std::abs(rhi));
  bool force_bisect = false;
  for (int it = 0; it < pp.max_iters; ++it) {
    ++st.secant_iters;
    double m;
    if (force_bisect) {
      m = 0.5 * (lo + hi);
    } else {
      m = lo - rlo * (hi - lo) / (rhi - rlo);
      if (!(m > lo && m < hi)) m = 0.5 * (lo + hi);
    }
    const double rm = detail::constraint_residual(s, x, m);
    if (std::isnan(rm)) throw ProjectionError("project: residual is NaN");
    if (std::abs(rm) <= rtol) return finish(m, rm);
    force_bisect = std::abs(rm) > 0.5 * r_last;
    r_last = std::abs(rm);
    if (rm < 0.0) {
      lo = m;
      rlo = rm;
    } else {
      hi = m;
      rhi = rm;
    }
    if (hi - lo <= pp.width_tol * (1.0 + std::abs(m)))
      return finish(std::abs(rlo) <= std::abs(rhi) ? lo : hi,
                    std::abs(rlo) <= std::abs(rhi) ? rlo : rhi);
  }
  throw ProjectionError("project: secant iteration cap reached");
}

// Projection onto the whole feasible set of a problem.
inline BoxLinearSet feasible_set(const Problem& p) { return BoxLinearSet{p.eq, p.l, p.u}; }

inline Vec project(const Problem& p, const Vec& x, Counters& cnt,
                   const ProjectionParams& pp = {}) {
  return project(feasible_set(p), x, cnt, pp);
}

// Projection of v onto the tangent cone of the feasible set at x:
//   {w : q'w = 0, w_i >= 0 where x_i is at l_i, w_i <= 0 where x_i is at u_i}.
// Expressed as a box-plus-constraint set with bounds 0 / +-inf, so the same
// root solve applies. Variables attached on both sides are pinned to 0.
//
// The cone's scalar equation is homogeneous (right-hand side 0), so the
// absolute residual acceptance used for the feasible set has no meaningful
// scale here: near a stationary point the output is orders of magnitude
// smaller than eps, and stopping the multiplier search at |r| <= eps would
// put a floor of about eps/slope under the output error. The root solve
// therefore accepts only exact zeros and otherwise runs to the bracket-width
// stop, which resolves the multiplier to near machine precision.
inline Vec project_tangent_cone(const Problem& p, const ActiveSets& sets, const Vec& v,
                                Counters& cnt, const ProjectionParams& pp = {}) {
  BoxLinearSet cone;
  cone.l.assign(p.n, -kInf);
  cone.u.assign(p.n, kInf);
  for (int i = 0; i < p.n; ++i) {
    if (sets.at_lower[i]) cone.l[i] = 0.0;
    if (sets.at_upper[i]) cone.u[i] = 0.0;
  }
  if (p.eq) cone.eq = LinearConstraint{p.eq->q, 0.0};
  ProjectionParams pc = pp;
  pc.eps = 0.0;
  return project(cone, v, cnt, pc);
}

// Face of the feasible set at x: actives held at their bound values, free
// variables keep their bounds, the linear constraint is kept.
inline BoxLinearSet face_set(const Problem& p, const ActiveSets& sets) {
  BoxLinearSet f{p.eq, p.l, p.u};
  for (int i = 0; i < p.n; ++i) {
    if (sets.at_lower[i] && sets.at_upper[i]) {
      // fixed variable, keep as is
    } else if (sets.at_lower[i]) {
      f.u[i] = p.l[i];
    } else if (sets.at_upper[i]) {
      f.l[i] = p.u[i];
    }
  }
  return f;
}

// Breakpoints of the ray x + t*d against the box. Components with
// |d_i| <= 1e-14 * ||d||_inf are treated as zero and never hit a bound.
struct Breakpoints {
  Vec t;                  // per-component breakpoint, +inf where none
  double t_min = kInf;    // first bound hit along the ray
  double t_max_finite = 0.0;  // largest finite breakpoint, 0 if none
  bool any_finite = false;
};

inline Breakpoints breakpoints(const Problem& p, const Vec& x, const Vec& d) {
  const double dmax = norm_inf(d);
  if (dmax == 0.0) throw std::invalid_argument("breakpoints: zero direction");
  const double dtol = 1e-14 * dmax;
  Breakpoints bp;
  bp.t.assign(p.n, kInf);
  for (int i = 0; i < p.n; ++i) {
    double ti = kInf;
    if (d[i] < -dtol) {
      if (p.l[i] > -kInf) ti = (p.l[i] - x[i]) / d[i];
    } else if (d[i] > dtol) {
      if (p.u[i] < kInf) ti = (p.u[i] - x[i]) / d[i];
    }
    bp.t[i] = ti;
    if (ti < bp.t_min) bp.t_min = ti;
    if (ti < kInf) {
      bp.any_finite = true;
      bp.t_max_finite = std::max(bp.t_max_finite, ti);
    }
  }
  return bp;
}

}  // namespace slbqp
