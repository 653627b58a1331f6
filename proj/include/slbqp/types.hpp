#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace slbqp {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Work counters for one solve. Matvecs are incremented at the single point
// where a Hessian operator is applied, projections at the single point where
// the piecewise-linear root solve (or its box-only closed form) runs, so no
// code path can count twice. Not thread safe; use one instance per solve.
struct Counters {
  std::int64_t matvecs = 0;
  std::int64_t projections = 0;
  std::int64_t objective_evals = 0;
};

// Projection failed: empty feasible set, or the root finder hit its
// iteration cap without meeting either stopping test.
class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The SDC inner solver met nonpositive curvature. SDC is only valid on
// strictly convex reduced problems; this signals invalid use.
class CurvatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// y += t * x
inline void axpy(double t, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += t * x[i];
}

}  // namespace slbqp
