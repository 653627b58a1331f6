#pragma once

// Random test-problem generator with a planted primal-dual solution.
//
// H = G D G' with G a product of three Householder reflections built from
// random unit vectors, and D diagonal with entries of magnitude
// 10^(i*ncond/(n-1)), i = 0..n-1: zero with probability zeroeig, negative
// with probability negeig, positive otherwise (one uniform draw per entry,
// three-way threshold). With no zero eigenvalues the condition number of H
// is exactly 10^ncond.
//
// A solution x* in (-1,1)^n is drawn first; a fraction naxsol of the
// variables is planted active (lower or upper with equal probability), a
// fraction degvar of those degenerate (zero multiplier), the rest get
// multipliers 10^(-mu*ndeg). Bounds pin x* on the planted actives and leave
// (-1,1) elsewhere. The linear term is then chosen so that (x*, lambda*,
// rho*) satisfies the first-order conditions exactly:
//     c = H x* - lambda* - rho* q,   b = q' x*.
// Starting points place about nax0*n variables on a random bound and the
// rest at the bound midpoint.
//
// Reproducibility: a seeded std::mt19937_64 with an explicit 53-bit mapping
// (u = ((r >> 11) + 0.5) * 2^-53, symmetric variant 2u - 1), so streams do
// not depend on library distribution internals. Draw order is fixed:
// x*, p1, p2, p3, xi, chi, psi, mu, nu, [q, rho* when linear], x0 activity,
// x0 side. Full n-length streams are consumed for xi..nu and the x0 draws
// regardless of which entries are used, so instances with different nax0
// share everything but the start.

#include <random>

#include "problem.hpp"

namespace slbqp {

struct GenParams {
  int n = 10;
  double ncond = 4.0;    // log10 of the target condition number
  double naxsol = 0.5;   // planted active fraction
  double ndeg = 1.0;     // multiplier decay exponent
  double zeroeig = 0.0;  // zero-eigenvalue fraction
  double negeig = 0.0;   // negative-eigenvalue fraction
  double degvar = 0.0;   // degenerate fraction of the planted actives
  double nax0 = 0.0;     // fraction of variables starting on a bound
  bool linear = true;    // include the q'x = b constraint
  std::uint64_t seed = 1;
};

// H stored as (D, p1, p2, p3); one apply is seven O(n) passes and counts as
// a single matvec.
class ReflectionHessian final : public HessianOp {
 public:
  ReflectionHessian(Vec d, Vec p1, Vec p2, Vec p3)
      : d_(std::move(d)), p1_(std::move(p1)), p2_(std::move(p2)), p3_(std::move(p3)) {}

  int size() const override { return static_cast<int>(d_.size()); }

  void apply(const Vec& x, Vec& y) const override {
    y = x;
    reflect(p3_, y);  // G' x
    reflect(p2_, y);
    reflect(p1_, y);
    for (std::size_t i = 0; i < d_.size(); ++i) y[i] *= d_[i];
    reflect(p1_, y);  // G (D G' x)
    reflect(p2_, y);
    reflect(p3_, y);
  }

  const Vec& diag() const { return d_; }

 private:
  static void reflect(const Vec& p, Vec& v) {
    const double t = 2.0 * dot(p, v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= t * p[i];
  }
  Vec d_, p1_, p2_, p3_;
};

struct GeneratedInstance {
  Problem problem;
  Vec x_star;
  Vec lambda_star;  // full length, zero off the planted actives
  double rho_star = 0.0;
  Vec x0;
  std::vector<int> planted_lower, planted_upper, planted_degenerate;
  std::string id;
  GenParams params;
  std::string warning;  // nonempty when parameters look inconsistent
};

namespace genrng {

// Fixed mapping of raw 64-bit draws; see the header comment.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}
  double u01() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }  // (0,1)
  double sym() { return 2.0 * u01() - 1.0; }                                      // (-1,1)
  void fill_u01(Vec& v) {
    for (auto& e : v) e = u01();
  }
  void fill_sym(Vec& v) {
    for (auto& e : v) e = sym();
  }

 private:
  std::mt19937_64 eng_;
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace genrng

inline std::string instance_id(const GenParams& g) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "n%d_nc%g_nax%g_nd%g_ze%g_ne%g_dv%g_lin%d_s%llu", g.n, g.ncond,
                g.naxsol, g.ndeg, g.zeroeig, g.negeig, g.degvar, g.linear ? 1 : 0,
                static_cast<unsigned long long>(g.seed));
  return buf;
}

inline GeneratedInstance generate(const GenParams& g) {
  if (g.n < 2) throw std::invalid_argument("generate: n must be >= 2");
  GeneratedInstance inst;
  inst.params = g;
  inst.id = instance_id(g);
  if (g.zeroeig + g.negeig >= 1.0)
    inst.warning = "zeroeig + negeig >= 1: no positive eigenvalues expected";

  genrng::Stream rng(g.seed);
  const int n = g.n;

  inst.x_star.resize(n);
  rng.fill_sym(inst.x_star);

  auto unit_vec = [&]() {
    Vec p(n);
    rng.fill_sym(p);
    const double nrm = norm2(p);
    for (auto& v : p) v /= nrm;
    return p;
  };
  Vec p1 = unit_vec(), p2 = unit_vec(), p3 = unit_vec();

  Vec xi(n), chi(n), psi(n), mu(n), nu(n);
  rng.fill_u01(xi);
  rng.fill_u01(chi);
  rng.fill_u01(psi);
  rng.fill_u01(mu);
  rng.fill_u01(nu);

  Vec d(n);
  for (int i = 0; i < n; ++i) {
    const double mag = std::pow(10.0, i * g.ncond / (n - 1));
    if (xi[i] <= g.zeroeig)
      d[i] = 0.0;
    else if (xi[i] <= g.zeroeig + g.negeig)
      d[i] = -mag;
    else
      d[i] = mag;
  }
  auto H = std::make_shared<ReflectionHessian>(d, p1, p2, p3);

  inst.lambda_star.assign(n, 0.0);
  Vec l(n, -1.0), u(n, 1.0);
  for (int i = 0; i < n; ++i) {
    if (chi[i] > g.naxsol) continue;  // stays inactive
    const bool lower = nu[i] < 0.5;
    const bool degenerate = psi[i] <= g.degvar;
    const double lam = degenerate ? 0.0 : std::pow(10.0, -mu[i] * g.ndeg);
    if (lower) {
      inst.planted_lower.push_back(i);
      l[i] = inst.x_star[i];
      inst.lambda_star[i] = lam;
    } else {
      inst.planted_upper.push_back(i);
      u[i] = inst.x_star[i];
      inst.lambda_star[i] = -lam;
    }
    if (degenerate) inst.planted_degenerate.push_back(i);
  }

  Vec q;
  double b = 0.0;
  if (g.linear) {
    q.resize(n);
    rng.fill_sym(q);
    do {
      inst.rho_star = rng.sym();
    } while (inst.rho_star == 0.0);
    b = dot(q, inst.x_star);
  }

  Vec hx;
  H->apply(inst.x_star, hx);
  Vec c(n);
  for (int i = 0; i < n; ++i) {
    c[i] = hx[i] - inst.lambda_star[i];
    if (g.linear) c[i] -= inst.rho_star * q[i];
  }

  Vec act0(n), side0(n);
  rng.fill_u01(act0);
  rng.fill_u01(side0);
  inst.x0.resize(n);
  for (int i = 0; i < n; ++i) {
    if (act0[i] <= g.nax0)
      inst.x0[i] = side0[i] < 0.5 ? l[i] : u[i];
    else
      inst.x0[i] = 0.5 * (l[i] + u[i]);
  }

  inst.problem.n = n;
  inst.problem.H = std::move(H);
  inst.problem.c = std::move(c);
  inst.problem.l = std::move(l);
  inst.problem.u = std::move(u);
  if (g.linear) inst.problem.eq = LinearConstraint{std::move(q), b};
  validate(inst.problem);
  return inst;
}

enum class SuiteKind { sconv_nondeg, sconv_deg, convex, nonconvex };

inline const char* suite_name(SuiteKind k) {
  switch (k) {
    case SuiteKind::sconv_nondeg: return "sconv_nondeg";
    case SuiteKind::sconv_deg: return "sconv_deg";
    case SuiteKind::convex: return "convex";
    case SuiteKind::nonconvex: return "nonconvex";
  }
  return "?";
}

inline SuiteKind suite_from_name(const std::string& s) {
  if (s == "sconv_nondeg") return SuiteKind::sconv_nondeg;
  if (s == "sconv_deg") return SuiteKind::sconv_deg;
  if (s == "convex") return SuiteKind::convex;
  if (s == "nonconvex") return SuiteKind::nonconvex;
  throw std::invalid_argument("unknown suite '" + s + "'");
}

// Parameter grids: ncond in {4,5,6}, naxsol in {0.1,0.5,0.9}, and one
// suite-specific third axis. Per-instance seeds derive from the base seed by
// index so a suite is reproducible as a whole.
inline std::vector<GenParams> suite(SuiteKind kind, int n, bool linear, std::uint64_t base_seed) {
  const double nconds[] = {4.0, 5.0, 6.0};
  const double naxsols[] = {0.1, 0.5, 0.9};
  std::vector<GenParams> out;
  int idx = 0;
  auto push = [&](GenParams g) {
    g.n = n;
    g.linear = linear;
    g.seed = genrng::splitmix64(base_seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(idx++));
    out.push_back(g);
  };
  for (double nc : nconds)
    for (double nax : naxsols) {
      switch (kind) {
        case SuiteKind::sconv_nondeg:
          for (double nd : {0.0, 1.0, 3.0}) {
            GenParams g;
            g.ncond = nc;
            g.naxsol = nax;
            g.ndeg = nd;
            push(g);
          }
          break;
        case SuiteKind::sconv_deg:
          for (double dv : {0.2, 0.5}) {
            GenParams g;
            g.ncond = nc;
            g.naxsol = nax;
            g.ndeg = 1.0;
            g.degvar = dv;
            push(g);
          }
          break;
        case SuiteKind::convex:
          for (double ze : {0.1, 0.2, 0.5}) {
            GenParams g;
            g.ncond = nc;
            g.naxsol = nax;
            g.ndeg = 1.0;
            g.zeroeig = ze;
            push(g);
          }
          break;
        case SuiteKind::nonconvex:
          for (double ne : {0.1, 0.2, 0.5}) {
            GenParams g;
            g.ncond = nc;
            g.naxsol = nax;
            g.ndeg = 1.0;
            g.negeig = ne;
            push(g);
          }
          break;
      }
    }
  return out;
}

// The four standard starting-point densities.
inline const std::vector<double>& suite_starts() {
  static const std::vector<double> s = {0.0, 0.1, 0.5, 0.9};
  return s;
}

}  // namespace slbqp
