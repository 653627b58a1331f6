#pragma once

// Minimization over the face of the current active set.
//
// With free variables F and the constraint q'x = b, the reduced problem is
//     min g(y) = 1/2 y' H_FF y + grad_F' y   s.t.  q_F' y = 0.
// A Householder reflection P = I - w w' (||w||^2 = 2) with P q_F = sigma e_1
// turns the constraint into "first coordinate zero", so the problem becomes
// unconstrained in the remaining |F|-1 coordinates z:
//     min p(z) = 1/2 z' M z + r' z,   M = (P H_FF P) without row/col 1.
// M is applied implicitly: embed (0, z), reflect, scatter to the free
// variables, apply H (the one counted matvec), gather, reflect, drop the
// first coordinate. Lifted directions therefore satisfy q'd = 0 up to
// roundoff by construction.
//
// Without a constraint (or when q vanishes on F) the reduction is just the
// gather/scatter, with dimension |F|.
//
// The eigenvalues of M interlace those of H restricted to the q-orthogonal
// complement, so its condition number never exceeds that of the full
// reduced operator; the conjugate gradient inner solver inherits that bound.

#include "config.hpp"

namespace slbqp {

struct ReducedProblem {
  const Problem* p = nullptr;
  std::vector<int> free_idx;
  bool constrained = false;  // Householder reduction in effect
  Vec w;                     // reflector, length |F|
  double sigma = 0.0;        // P q_F = sigma e_1
  int dim = 0;
  Vec r;  // reduced gradient at the anchor point
};

inline ReducedProblem build_reduced(const Problem& p, const Vec& grad, const ActiveSets& sets) {
  ReducedProblem red;
  red.p = &p;
  red.free_idx = sets.free_idx;
  const int s = static_cast<int>(red.free_idx.size());

  Vec qf;
  if (p.eq) {
    qf.resize(s);
    double qn = 0.0;
    for (int k = 0; k < s; ++k) {
      qf[k] = p.eq->q[red.free_idx[k]];
      qn += qf[k] * qf[k];
    }
    red.constrained = qn > 0.0;
  }

  Vec gf(s);
  for (int k = 0; k < s; ++k) gf[k] = grad[red.free_idx[k]];

  if (!red.constrained) {
    red.dim = s;
    red.r = std::move(gf);
    return red;
  }

  // Householder: sigma = -sign(q_1)||q_F|| (sign(0) = +1) avoids cancellation
  // in v = q_F - sigma e_1.
  const double qnorm = norm2(qf);
  red.sigma = (qf[0] >= 0.0) ? -qnorm : qnorm;
  Vec v = qf;
  v[0] -= red.sigma;
  const double vnorm = norm2(v);
  red.w.resize(s);
  const double scale = std::sqrt(2.0) / vnorm;
  for (int k = 0; k < s; ++k) red.w[k] = scale * v[k];

  // r = (P grad_F) without the first coordinate
  const double wg = dot(red.w, gf);
  red.dim = s - 1;
  red.r.resize(red.dim);
  for (int k = 1; k < s; ++k) red.r[k - 1] = gf[k] - wg * red.w[k];
  return red;
}

// Lift reduced coordinates to a full-space direction (zeros off the face).
inline Vec lift(const ReducedProblem& red, const Vec& z) {
  const int n = red.p->n;
  const int s = static_cast<int>(red.free_idx.size());
  Vec d(n, 0.0);
  if (!red.constrained) {
    for (int k = 0; k < s; ++k) d[red.free_idx[k]] = z[k];
    return d;
  }
  // y = P (0, z)
  double wz = 0.0;
  for (int k = 1; k < s; ++k) wz += red.w[k] * z[k - 1];
  d[red.free_idx[0]] = -wz * red.w[0];
  for (int k = 1; k < s; ++k) d[red.free_idx[k]] = z[k - 1] - wz * red.w[k];
  return d;
}

// out = M z; one counted matvec.
inline Vec reduced_apply(const ReducedProblem& red, const Vec& z, Counters& cnt, Vec& work_full,
                         Vec& work_hv) {
  const int s = static_cast<int>(red.free_idx.size());
  work_full = lift(red, z);
  hessian_apply(*red.p, work_full, work_hv, cnt);
  if (!red.constrained) {
    Vec out(s);
    for (int k = 0; k < s; ++k) out[k] = work_hv[red.free_idx[k]];
    return out;
  }
  double wt = 0.0;
  for (int k = 0; k < s; ++k) wt += red.w[k] * work_hv[red.free_idx[k]];
  Vec out(red.dim);
  for (int k = 1; k < s; ++k) out[k - 1] = work_hv[red.free_idx[k]] - wt * red.w[k];
  return out;
}

enum class InnerStatus { progress_stop, exact_solution, nonpositive_curvature, iter_cap };

inline const char* inner_status_name(InnerStatus s) {
  switch (s) {
    case InnerStatus::progress_stop: return "progress_stop";
    case InnerStatus::exact_solution: return "exact_solution";
    case InnerStatus::nonpositive_curvature: return "nonpositive_curvature";
    case InnerStatus::iter_cap: return "iter_cap";
  }
  return "?";
}

struct InnerOutcome {
  Vec z;  // accumulated reduced step of this call
  Vec d;  // lifted direction: the step, or the nonpositive-curvature ray
  InnerStatus status = InnerStatus::progress_stop;
  double curvature = std::numeric_limits<double>::quiet_NaN();  // d'Hd when
                                                                // nonpositive_curvature
  double model_decrease = 0.0;
  int iterations = 0;
};

// Carries the inner iteration across phase-2 steps. Valid only while the
// driver keeps taking full steps on an unchanged face; any other step resets
// it. The residual itself is refreshed from the current gradient on resume
// (equal in exact arithmetic, tighter in floating point); the search
// direction and the decrease history persist, which is what makes the
// resumed run behave as if it had never stopped.
struct InnerState {
  bool valid = false;
  std::vector<int> face;
  double r0_norm = 0.0;  // reduced gradient norm at phase-2 entry
  std::vector<double> decreases;
  // CG
  Vec pdir;
  double rr_at_pdir = 0.0;
  bool have_dir = false;
  // SDC
  int sdc_k = 0;
  double sdc_prev_cauchy = 0.0, sdc_prev_gnorm = 0.0, sdc_yuan = 0.0;

  void reset(const ReducedProblem& red) {
    valid = true;
    face = red.free_idx;
    r0_norm = norm2(red.r);
    decreases.clear();
    have_dir = false;
    rr_at_pdir = 0.0;
    sdc_k = 0;
    sdc_yuan = 0.0;
  }
  bool matches(const ReducedProblem& red) const { return valid && face == red.free_idx; }
};

namespace detail {

inline bool progress_stop(const std::vector<double>& dec, double xi) {
  if (dec.size() < 2) return false;
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < dec.size(); ++i) m = std::max(m, dec[i]);
  return dec.back() <= xi * m;
}

}  // namespace detail

// Conjugate gradient on the reduced problem. Stops on: residual below
// 1e-12 of the entry residual (exact_solution); decrease falling under the
// xi fraction of the best decrease this run (progress_stop); a direction of
// nonpositive curvature (returned lifted, for the breakpoint step); or the
// iteration budget.
inline InnerOutcome cg_minimize(const ReducedProblem& red, InnerState& st, double xi,
                                int max_iters, Counters& cnt) {
  InnerOutcome out;
  out.z.assign(red.dim, 0.0);
  if (!st.matches(red)) st.reset(red);
  if (red.dim == 0) {
    out.status = InnerStatus::exact_solution;
    out.d.assign(red.p->n, 0.0);
    return out;
  }

  Vec r = red.r;  // residual = reduced gradient at the current point
  Vec work_full, work_hv;
  for (;;) {
    const double rnorm = norm2(r);
    if (rnorm <= 1e-12 * st.r0_norm) {
      out.status = InnerStatus::exact_solution;
      break;
    }
    if (out.iterations >= max_iters) {
      out.status = InnerStatus::iter_cap;
      break;
    }
    const double rr = dot(r, r);
    Vec pd(red.dim);
    if (st.have_dir) {
      const double beta = rr / st.rr_at_pdir;
      for (int k = 0; k < red.dim; ++k) pd[k] = -r[k] + beta * st.pdir[k];
    } else {
      for (int k = 0; k < red.dim; ++k) pd[k] = -r[k];
    }
    Vec w = reduced_apply(red, pd, cnt, work_full, work_hv);
    const double curv = dot(pd, w);
    const double alpha = rr / curv;
    if (!(curv > 0.0) || !std::isfinite(alpha)) {
      st.valid = false;
      if (norm_inf(out.z) == 0.0) {
        out.status = InnerStatus::nonpositive_curvature;
        out.d = lift(red, pd);
        out.curvature = curv;
        return out;
      }
      out.status = InnerStatus::progress_stop;  // hand back the progress so far
      break;
    }
    axpy(alpha, pd, out.z);
    axpy(alpha, w, r);
    const double dec = 0.5 * alpha * rr;
    out.model_decrease += dec;
    st.decreases.push_back(dec);
    st.pdir = std::move(pd);
    st.rr_at_pdir = rr;
    st.have_dir = true;
    ++out.iterations;
    if (detail::progress_stop(st.decreases, xi)) {
      out.status = InnerStatus::progress_stop;
      break;
    }
  }
  out.d = lift(red, out.z);
  return out;
}

// Steepest descent with the SDC steplength schedule (kbar Cauchy steps, then
// ell steps frozen at the Yuan length). Valid on strictly convex reduced
// problems only; nonpositive curvature throws.
inline InnerOutcome sdc_minimize(const ReducedProblem& red, InnerState& st, double xi, int kbar,
                                 int ell, int max_iters, Counters& cnt) {
  InnerOutcome out;
  out.z.assign(red.dim, 0.0);
  if (!st.matches(red)) st.reset(red);
  if (red.dim == 0) {
    out.status = InnerStatus::exact_solution;
    out.d.assign(red.p->n, 0.0);
    return out;
  }

  Vec r = red.r;
  Vec work_full, work_hv;
  for (;;) {
    const double rr = dot(r, r);
    if (std::sqrt(rr) <= 1e-12 * st.r0_norm) {
      out.status = InnerStatus::exact_solution;
      break;
    }
    if (out.iterations >= max_iters) {
      out.status = InnerStatus::iter_cap;
      break;
    }
    Vec w = reduced_apply(red, r, cnt, work_full, work_hv);
    const double curv = dot(r, w);
    if (!(curv > 0.0))
      throw CurvatureError("sdc_minimize: nonpositive curvature; SDC requires a strictly convex reduced problem");
    const double cauchy = rr / curv;
    double alpha;
    switch (sdc_schedule(st.sdc_k, kbar, ell)) {
      case SdcChoice::cauchy:
        alpha = cauchy;
        break;
      case SdcChoice::yuan_fresh:
        st.sdc_yuan = yuan_step(st.sdc_prev_cauchy, cauchy, st.sdc_prev_gnorm, std::sqrt(rr));
        alpha = st.sdc_yuan;
        break;
      default:
        alpha = st.sdc_yuan;
        break;
    }
    axpy(-alpha, r, out.z);
    const double dec = alpha * rr - 0.5 * alpha * alpha * curv;
    out.model_decrease += dec;
    st.decreases.push_back(dec);
    axpy(-alpha, w, r);
    st.sdc_prev_cauchy = cauchy;
    st.sdc_prev_gnorm = std::sqrt(rr);
    ++st.sdc_k;
    ++out.iterations;
    if (detail::progress_stop(st.decreases, xi)) {
      out.status = InnerStatus::progress_stop;
      break;
    }
  }
  out.d = lift(red, out.z);
  return out;
}

}  // namespace slbqp
