#pragma once

// Problem files are JSON:
//   {
//     "n": 3,
//     "c": [...],
//     "q": [...] or null,          // null: no linear constraint
//     "b": number or null,
//     "l": [..., null, ...],       // null entry: -inf
//     "u": [..., null, ...],       // null entry: +inf
//     "H": {"format": "dense", "rows": [[...], ...]}
//        | {"format": "coo", "i": [...], "j": [...], "v": [...]}   // lower triangle
//   }
// Generated instances get a sidecar with the planted certificate
// (x_star, lambda_star, rho_star, seed, x0).

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "problem.hpp"

namespace slbqp {

using json = nlohmann::json;

namespace detail {

inline Vec bounds_from_json(const json& a, double infval, const char* name) {
  if (!a.is_array()) throw std::invalid_argument(std::string("problem json: ") + name + " must be an array");
  Vec v;
  v.reserve(a.size());
  for (const auto& e : a) {
    if (e.is_null())
      v.push_back(infval);
    else
      v.push_back(e.get<double>());
  }
  return v;
}

inline json bounds_to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) {
    if (std::isinf(x))
      a.push_back(nullptr);
    else
      a.push_back(x);
  }
  return a;
}

}  // namespace detail

inline Problem problem_from_json(const json& j) {
  Problem p;
  p.n = j.at("n").get<int>();
  p.c = j.at("c").get<Vec>();
  p.l = detail::bounds_from_json(j.at("l"), -kInf, "l");
  p.u = detail::bounds_from_json(j.at("u"), kInf, "u");
  const json& q = j.at("q");
  const json& b = j.at("b");
  if (!q.is_null() != !b.is_null())
    throw std::invalid_argument("problem json: q and b must both be present or both null");
  if (!q.is_null()) p.eq = LinearConstraint{q.get<Vec>(), b.get<double>()};

  const json& h = j.at("H");
  const std::string fmt = h.at("format").get<std::string>();
  if (fmt == "dense") {
    const json& rows = h.at("rows");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(p.n))
      throw std::invalid_argument("problem json: H.rows must have n rows");
    Vec a;
    a.reserve(static_cast<std::size_t>(p.n) * p.n);
    for (const auto& r : rows) {
      if (r.size() != static_cast<std::size_t>(p.n))
        throw std::invalid_argument("problem json: dense H row length != n");
      for (const auto& e : r) a.push_back(e.get<double>());
    }
    p.H = std::make_shared<DenseHessian>(p.n, std::move(a));
  } else if (fmt == "coo") {
    p.H = std::make_shared<CooHessian>(p.n, h.at("i").get<std::vector<int>>(),
                                       h.at("j").get<std::vector<int>>(), h.at("v").get<Vec>());
  } else {
    throw std::invalid_argument("problem json: unknown H format '" + fmt + "'");
  }
  validate(p);
  return p;
}

// Serialize with a dense Hessian block obtained through apply() on unit
// vectors, so any operator backend can be written out.
inline json problem_to_json_dense(const Problem& p) {
  json h;
  h["format"] = "dense";
  json rows = json::array();
  Vec e(p.n, 0.0), col;
  std::vector<Vec> cols(p.n);
  for (int jcol = 0; jcol < p.n; ++jcol) {
    e[jcol] = 1.0;
    p.H->apply(e, col);
    e[jcol] = 0.0;
    cols[jcol] = col;
  }
  for (int i = 0; i < p.n; ++i) {
    json r = json::array();
    for (int jcol = 0; jcol < p.n; ++jcol) r.push_back(cols[jcol][i]);
    rows.push_back(std::move(r));
  }
  h["rows"] = std::move(rows);

  json j;
  j["n"] = p.n;
  j["c"] = p.c;
  if (p.eq) {
    j["q"] = p.eq->q;
    j["b"] = p.eq->b;
  } else {
    j["q"] = nullptr;
    j["b"] = nullptr;
  }
  j["l"] = detail::bounds_to_json(p.l);
  j["u"] = detail::bounds_to_json(p.u);
  j["H"] = std::move(h);
  return j;
}

inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  json j;
  in >> j;
  return problem_from_json(j);
}

inline void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace slbqp
