#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "slbqp/projection.hpp"

using namespace slbqp;

namespace {

// Box + simplex-style constraint instances with a mix of finite/infinite
// bounds and occasional fixed variables.
struct Instance {
  BoxLinearSet set;
  Vec x;
};

Instance random_instance(std::mt19937_64& rng, int n, bool with_eq, bool allow_inf) {
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  Instance inst;
  inst.set.l.resize(n);
  inst.set.u.resize(n);
  inst.x.resize(n);
  for (int i = 0; i < n; ++i) {
    double a = U(rng), b = U(rng);
    if (a > b) std::swap(a, b);
    if (U01(rng) < 0.08) b = a;  // fixed variable
    if (allow_inf && U01(rng) < 0.15) a = -kInf;
    if (allow_inf && U01(rng) < 0.15) b = kInf;
    inst.set.l[i] = a;
    inst.set.u[i] = b;
    inst.x[i] = U(rng);
  }
  if (with_eq) {
    Vec q(n);
    for (auto& v : q) v = U(rng);
    if (norm_inf(q) == 0.0) q[0] = 1.0;
    // pick b attainable: q' of a random feasible point
    Vec z(n);
    for (int i = 0; i < n; ++i) {
      const double lo = std::max(inst.set.l[i], -5.0), hi = std::min(inst.set.u[i], 5.0);
      z[i] = lo + (hi - lo) * U01(rng);
    }
    inst.set.eq = LinearConstraint{q, dot(q, z)};
  }
  return inst;
}

}  // namespace

TEST_CASE("projection matches 3^n KKT enumeration") {
  std::mt19937_64 rng(123);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Instance inst = random_instance(rng, n, trial % 4 != 0, trial % 3 == 0);
    auto ref = oracle::enum_project(inst.set.l, inst.set.u, inst.set.eq, inst.x);
    REQUIRE(ref.has_value());  // constructed feasible
    Counters cnt;
    Vec v = project(inst.set, inst.x, cnt);
    for (int i = 0; i < n; ++i) CHECK(v[i] == Catch::Approx((*ref)[i]).margin(2e-8));
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("projection is idempotent and nonexpansive") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    Instance a = random_instance(rng, n, true, false);
    Instance b = a;
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (auto& v : b.x) v = U(rng);
    Counters cnt;
    const Vec pa = project(a.set, a.x, cnt);
    const Vec pb = project(a.set, b.x, cnt);
    const Vec paa = project(a.set, pa, cnt);

    Vec d1(n), d2(n);
    for (int i = 0; i < n; ++i) {
      d1[i] = pa[i] - pb[i];
      d2[i] = a.x[i] - b.x[i];
    }
    CHECK(norm2(d1) <= norm2(d2) + 1e-10);
    for (int i = 0; i < n; ++i) CHECK(paa[i] == Catch::Approx(pa[i]).margin(1e-8));
  }
}

TEST_CASE("projected points satisfy the constraint and write bounds exactly") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 10);
    Instance inst = random_instance(rng, n, true, true);
    Counters cnt;
    ProjectStats st;
    Vec v = project(inst.set, inst.x, cnt, {}, &st);
    const double b = inst.set.eq->b;
    CHECK(std::abs(dot(inst.set.eq->q, v) - b) <= 1e-9 * (1.0 + std::abs(b)));
    for (int i = 0; i < n; ++i) {
      CHECK(v[i] >= inst.set.l[i]);
      CHECK(v[i] <= inst.set.u[i]);
      // clamped components carry the exact bound value
      if (v[i] != inst.x[i] + st.mu * inst.set.eq->q[i])
        CHECK((v[i] == inst.set.l[i] || v[i] == inst.set.u[i]));
    }
    CHECK(cnt.projections == 1);
  }
}

TEST_CASE("box-only projection is the componentwise clamp") {
  BoxLinearSet s;
  s.l = {0.0, -1.0, -kInf};
  s.u = {1.0, 1.0, 0.0};
  Counters cnt;
  Vec v = project(s, Vec{2.0, -5.0, 3.0}, cnt);
  CHECK(v == Vec{1.0, -1.0, 0.0});
  CHECK(cnt.projections == 1);
}

TEST_CASE("infeasible sets are reported") {
  BoxLinearSet s;
  s.l = {0.0, 0.0};
  s.u = {1.0, 1.0};
  s.eq = LinearConstraint{{1.0, 1.0}, 5.0};  // max attainable is 2
  Counters cnt;
  CHECK_THROWS_AS(project(s, Vec{0.5, 0.5}, cnt), ProjectionError);

  BoxLinearSet bad;
  bad.l = {1.0};
  bad.u = {0.0};
  CHECK_THROWS_AS(project(bad, Vec{0.5}, cnt), ProjectionError);
}

TEST_CASE("boundary-attainable right-hand sides work") {
  BoxLinearSet s;
  s.l = {0.0, 0.0};
  s.u = {1.0, 1.0};
  s.eq = LinearConstraint{{1.0, 1.0}, 2.0};  // only v = (1,1)
  Counters cnt;
  Vec v = project(s, Vec{-3.0, 0.2}, cnt);
  CHECK(v[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(v[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("badly scaled inputs terminate via the width stop") {
  const int n = 4;
  BoxLinearSet s;
  s.l.assign(n, -kInf);
  s.u.assign(n, kInf);
  for (int i = 0; i < 2; ++i) s.l[i] = 0.0;  // cone-like
  s.eq = LinearConstraint{{1.0, -2.0, 0.5, 1.0}, 0.0};
  Counters cnt;
  Vec huge = {1e9, -3e9, 2e9, -1e9};
  Vec v = project(s, huge, cnt);
  // constraint satisfied to relative accuracy of the data scale
  CHECK(std::abs(dot(s.eq->q, v)) <= 1e-5 * norm2(huge));
  for (int i = 0; i < 2; ++i) CHECK(v[i] >= 0.0);
}

TEST_CASE("tangent cone projection respects activity pattern") {
  Problem p;
  p.n = 4;
  p.H = std::make_shared<DenseHessian>(4, Vec(16, 0.0));
  p.c = Vec(4, 0.0);
  p.l = {0.0, -1.0, 0.0, -kInf};
  p.u = {2.0, 1.0, 0.0, kInf};
  p.eq = LinearConstraint{{1.0, 1.0, 1.0, 1.0}, 0.0};
  Vec x = {0.0, 1.0, 0.0, -1.0};  // lower-active, upper-active, fixed, free
  ActiveSets sets = active_sets(p, x);
  Counters cnt;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    Vec v(4);
    for (auto& e : v) e = U(rng);
    Vec w = project_tangent_cone(p, sets, v, cnt);
    CHECK(w[0] >= -1e-12);
    CHECK(w[1] <= 1e-12);
    CHECK(std::abs(w[2]) <= 1e-12);
    CHECK(std::abs(dot(p.eq->q, w)) <= 1e-9);
    // compare against enumeration on the cone expressed as a box set
    BoxLinearSet cone;
    cone.l = {0.0, -kInf, 0.0, -kInf};
    cone.u = {kInf, 0.0, 0.0, kInf};
    cone.eq = LinearConstraint{p.eq->q, 0.0};
    auto ref = oracle::enum_project(cone.l, cone.u, cone.eq, v);
    REQUIRE(ref.has_value());
    for (int i = 0; i < 4; ++i) CHECK(w[i] == Catch::Approx((*ref)[i]).margin(1e-8));
  }
}

TEST_CASE("breakpoints") {
  Problem p;
  p.n = 4;
  p.H = std::make_shared<DenseHessian>(4, Vec(16, 0.0));
  p.c = Vec(4, 0.0);
  p.l = {0.0, 0.0, -kInf, 0.0};
  p.u = {1.0, kInf, 1.0, 1.0};
  Vec x = {0.5, 0.5, 0.5, 0.5};

  SECTION("finite and infinite hits") {
    Vec d = {1.0, -1.0, -1.0, 1e-20};
    Breakpoints bp = breakpoints(p, x, d);
    CHECK(bp.t[0] == Catch::Approx(0.5));   // hits u
    CHECK(bp.t[1] == Catch::Approx(0.5));   // hits l
    CHECK(bp.t[2] == kInf);                 // l = -inf
    CHECK(bp.t[3] == kInf);                 // below direction tolerance
    CHECK(bp.t_min == Catch::Approx(0.5));
    CHECK(bp.t_max_finite == Catch::Approx(0.5));
  }
  SECTION("all infinite") {
    Vec d = {0.0, 1.0, -1.0, 0.0};
    Breakpoints bp = breakpoints(p, x, d);
    CHECK(bp.t_min == kInf);
    CHECK_FALSE(bp.any_finite);
  }
  SECTION("zero direction rejected") {
    CHECK_THROWS_AS(breakpoints(p, x, Vec(4, 0.0)), std::invalid_argument);
  }
  SECTION("feasibility up to the first breakpoint") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      Vec d(4);
      for (auto& v : d) v = U(rng);
      if (norm_inf(d) == 0.0) continue;
      Breakpoints bp = breakpoints(p, x, d);
      const double tstep = std::min(bp.t_min, 10.0);
      for (double frac : {0.25, 0.9, 1.0}) {
        for (int i = 0; i < 4; ++i) {
          const double xi = x[i] + frac * tstep * d[i];
          CHECK(xi >= p.l[i] - 1e-9);
          CHECK(xi <= p.u[i] + 1e-9);
        }
      }
    }
  }
}
