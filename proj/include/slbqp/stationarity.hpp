#pragma once

// First-order quantities at an iterate x:
//
//   rho(x)   multiplier estimate for the linear constraint,
//            q_F' grad_F / q_F' q_F over the free variables (0 if q_F = 0)
//   h(x)     grad - rho q
//   phi(x)   free gradient: h_i on free variables, 0 on actives
//   pg(x)    projection of -grad onto the tangent cone (the steepest feasible
//            descent direction); the stationarity measure is ||pg||
//   beta(x)  chopped gradient, defined through the identity phi + beta = -pg
//
// An iterate is "proportional" when ||beta||_inf <= Gamma ||phi||_2: the
// bound-violating part of the gradient is dominated and it pays to keep
// minimizing on the current face.

#include "projection.hpp"

namespace slbqp {

inline double rho_multiplier(const Problem& p, const ActiveSets& sets, const Vec& grad) {
  if (!p.eq) return 0.0;
  double num = 0.0, den = 0.0;
  for (int i : sets.free_idx) {
    num += p.eq->q[i] * grad[i];
    den += p.eq->q[i] * p.eq->q[i];
  }
  if (den <= 0.0) return 0.0;  // q vanishes on the free set
  return num / den;
}

struct GradientSplit {
  double f = 0.0;  // objective at x, recovered from the same H*x product
  Vec grad;
  double rho = 0.0;
  Vec h;
  Vec phi, beta;
  Vec pg;                    // projected gradient, pg = -(phi + beta)
  double measure = 0.0;      // ||phi + beta||_2
  double measure_inf = 0.0;  // ||phi + beta||_inf
  ActiveSets sets;
};

// One matvec and one (tangent cone) projection.
inline GradientSplit split(const Problem& p, const Vec& x, Counters& cnt,
                           const ProjectionParams& pp = {}) {
  GradientSplit sp;
  Vec hx;
  hessian_apply(p, x, hx, cnt);
  sp.grad = hx;
  for (int i = 0; i < p.n; ++i) sp.grad[i] -= p.c[i];
  // f = 1/2 x'Hx - c'x = 1/2 (x'grad - c'x)
  sp.f = 0.5 * (dot(x, sp.grad) - dot(p.c, x));
  sp.sets = active_sets(p, x);
  sp.rho = rho_multiplier(p, sp.sets, sp.grad);

  sp.h = sp.grad;
  if (p.eq)
    for (int i = 0; i < p.n; ++i) sp.h[i] -= sp.rho * p.eq->q[i];

  sp.phi.assign(p.n, 0.0);
  for (int i : sp.sets.free_idx) sp.phi[i] = sp.h[i];

  Vec mg(p.n);
  for (int i = 0; i < p.n; ++i) mg[i] = -sp.grad[i];
  sp.pg = project_tangent_cone(p, sp.sets, mg, cnt, pp);

  sp.beta.resize(p.n);
  for (int i = 0; i < p.n; ++i) sp.beta[i] = -sp.pg[i] - sp.phi[i];
  sp.measure = norm2(sp.pg);
  sp.measure_inf = norm_inf(sp.pg);
  return sp;
}

// Binding set: actives whose multiplier estimate has the correct sign.
inline std::vector<std::uint8_t> binding_flags(const ActiveSets& sets, const Vec& h) {
  std::vector<std::uint8_t> b(h.size(), 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (sets.at_lower[i] && h[i] >= 0.0) b[i] = 1;
    if (sets.at_upper[i] && h[i] <= 0.0) b[i] = 1;
  }
  return b;
}

// A(x) = B(x): every active variable is binding.
inline bool binding_equals_active(const ActiveSets& sets, const Vec& h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    const bool active = sets.at_lower[i] || sets.at_upper[i];
    if (!active) continue;
    const bool binding = (sets.at_lower[i] && h[i] >= 0.0) || (sets.at_upper[i] && h[i] <= 0.0);
    if (!binding) return false;
  }
  return true;
}

struct MultiplierEstimate {
  double rho = 0.0;
  Vec lambda;  // full length; zero on free variables
};

inline MultiplierEstimate multiplier_estimates(const ActiveSets& sets, const Vec& h, double rho) {
  MultiplierEstimate m;
  m.rho = rho;
  m.lambda.assign(h.size(), 0.0);
  for (int i : sets.lower_idx) m.lambda[i] = std::max(0.0, h[i]);
  for (int i : sets.upper_idx) m.lambda[i] = std::min(0.0, h[i]);
  // a variable fixed on both sides keeps the sign h dictates
  for (std::size_t i = 0; i < h.size(); ++i)
    if (sets.at_lower[i] && sets.at_upper[i]) m.lambda[i] = h[i];
  return m;
}

// Ties count as proportional; phi = 0 with beta != 0 never does.
inline bool is_proportional(const GradientSplit& sp, double gamma) {
  return norm_inf(sp.beta) <= gamma * norm2(sp.phi);
}

}  // namespace slbqp
