#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "slbqp/json_io.hpp"
#include "slbqp/problem.hpp"

using namespace slbqp;

TEST_CASE("objective and gradient match dense oracles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    oracle::Mat H = oracle::random_symmetric(rng, n);
    Vec c(n), x(n);
    for (auto& v : c) v = U(rng);
    for (auto& v : x) v = U(rng);
    Problem p = oracle::make_problem(H, c, Vec(n, -kInf), Vec(n, kInf));

    Counters cnt;
    const double f = objective(p, x, cnt);
    const Vec g = gradient(p, x, cnt);
    CHECK(cnt.matvecs == 2);
    CHECK(cnt.objective_evals == 1);

    CHECK(f == Catch::Approx(oracle::dense_objective(H, c, x)).margin(1e-12));
    const Vec gref = oracle::dense_gradient(H, c, x);
    const Vec gfd = oracle::fd_gradient(H, c, x);
    for (int i = 0; i < n; ++i) {
      CHECK(g[i] == Catch::Approx(gref[i]).margin(1e-12));
      CHECK(g[i] == Catch::Approx(gfd[i]).margin(1e-6));
    }

    Vec hx;
    p.H->apply(x, hx);
    CHECK(objective_given_hx(p, x, hx) == Catch::Approx(f).margin(0.0));
  }
}

TEST_CASE("dense and coo backends agree through one apply interface") {
  std::mt19937_64 rng(11);
  const int n = 9;
  oracle::Mat H = oracle::random_symmetric(rng, n);
  // strict lower triangle + diagonal as COO
  std::vector<int> ii, jj;
  Vec vv;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      ii.push_back(i);
      jj.push_back(j);
      vv.push_back(H[i][j]);
    }
  DenseHessian hd(n, oracle::flatten(H));
  CooHessian hc(n, ii, jj, vv);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec x(n), yd, yc;
  for (auto& v : x) v = U(rng);
  hd.apply(x, yd);
  hc.apply(x, yc);
  for (int i = 0; i < n; ++i) CHECK(yd[i] == Catch::Approx(yc[i]).margin(1e-14));
}

TEST_CASE("construction rejects bad data") {
  CHECK_THROWS_AS(DenseHessian(2, Vec{1.0, 2.0, 3.0, 4.0}), std::invalid_argument);  // asymmetric
  CHECK_THROWS_AS(DenseHessian(2, Vec{1.0, 2.0, 3.0}), std::invalid_argument);       // wrong size
  CHECK_THROWS_AS(CooHessian(3, {0}, {1}, {1.0}), std::invalid_argument);  // upper triangle entry
  CHECK_THROWS_AS(CooHessian(3, {5}, {0}, {1.0}), std::invalid_argument);  // out of range

  Problem p;
  p.n = 2;
  p.H = std::make_shared<DenseHessian>(2, Vec{1, 0, 0, 1});
  p.c = {1, 1};
  p.l = {0, 0};
  p.u = {1, -1};  // l > u
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p.u = {1, 1};
  CHECK_NOTHROW(validate(p));
  p.eq = LinearConstraint{{0.0, 0.0}, 1.0};  // zero q
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("active set classification honors the attachment tolerance") {
  Problem p;
  p.n = 5;
  p.H = std::make_shared<DenseHessian>(5, oracle::flatten(oracle::Mat(5, Vec(5, 0.0))));
  p.c = Vec(5, 0.0);
  p.l = {0.0, 0.0, -kInf, 2.0, 1.0};
  p.u = {1.0, 1.0, 5.0, 2.0, kInf};
  // x: exactly at l, within tol of l, free, fixed var, near u of +inf (free)
  Vec x = {0.0, 5e-13, 1.0, 2.0, 1e9};
  ActiveSets s = active_sets(p, x);
  CHECK(s.at_lower[0]);
  CHECK(s.at_lower[1]);
  CHECK_FALSE(s.at_upper[1]);
  CHECK_FALSE(s.at_lower[2]);  // bound is -inf
  CHECK(s.at_lower[3]);
  CHECK(s.at_upper[3]);  // fixed variable attaches on both sides
  CHECK_FALSE(s.at_upper[4]);
  CHECK(s.free_idx == std::vector<int>{2, 4});
  const ActiveSets s2 = active_sets(p, x);
  CHECK(s == s2);
}

TEST_CASE("problem json round trip, including infinite bounds and coo") {
  json j = {
      {"n", 3},
      {"c", {1.0, -2.0, 0.5}},
      {"q", {1.0, 1.0, 1.0}},
      {"b", 1.5},
      {"l", {0.0, nullptr, -1.0}},
      {"u", {nullptr, 2.0, 1.0}},
      {"H", {{"format", "coo"}, {"i", {0, 1, 2, 2}}, {"j", {0, 1, 2, 0}}, {"v", {2.0, 3.0, 4.0, 0.5}}}},
  };
  Problem p = problem_from_json(j);
  CHECK(p.l[1] == -kInf);
  CHECK(p.u[0] == kInf);
  REQUIRE(p.eq.has_value());
  CHECK(p.eq->b == 1.5);

  // serialize densely and reload: operators must agree
  json jd = problem_to_json_dense(p);
  Problem p2 = problem_from_json(jd);
  Vec x = {0.3, -0.7, 1.1}, y1, y2;
  p.H->apply(x, y1);
  p2.H->apply(x, y2);
  for (int i = 0; i < 3; ++i) CHECK(y1[i] == Catch::Approx(y2[i]).margin(1e-15));
  CHECK(jd["l"][1].is_null());
  CHECK(jd["u"][0].is_null());

  SECTION("q and b must be jointly null or jointly present") {
    json bad = j;
    bad["b"] = nullptr;
    CHECK_THROWS_AS(problem_from_json(bad), std::invalid_argument);
  }
  SECTION("unknown hessian format is rejected") {
    json bad = j;
    bad["H"]["format"] = "csr";
    CHECK_THROWS_AS(problem_from_json(bad), std::invalid_argument);
  }
}
