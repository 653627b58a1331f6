#pragma once

// Problem data for
//     min f(x) = 1/2 x'Hx - c'x
//     s.t. q'x = b   (optional single linear constraint)
//          l <= x <= u
// H is symmetric and only ever used through matrix-vector products, so the
// storage backends live behind one apply() interface and every product is
// counted in the same place.

#include <algorithm>
#include <memory>
#include <optional>

#include "types.hpp"

namespace slbqp {

class HessianOp {
 public:
  virtual ~HessianOp() = default;
  virtual int size() const = 0;
  // y = H x. y is resized by the callee.
  virtual void apply(const Vec& x, Vec& y) const = 0;
};

// Row-major dense storage. Symmetry is verified on construction.
class DenseHessian final : public HessianOp {
 public:
  DenseHessian(int n, Vec entries) : n_(n), a_(std::move(entries)) {
    if (n_ < 0 || a_.size() != static_cast<std::size_t>(n_) * n_)
      throw std::invalid_argument("DenseHessian: entry count != n*n");
    double scale = 0.0;
    for (double v : a_) {
      if (!std::isfinite(v)) throw std::invalid_argument("DenseHessian: nonfinite entry");
      scale = std::max(scale, std::abs(v));
    }
    const double tol = 1e-12 * std::max(1.0, scale);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (std::abs(at(i, j) - at(j, i)) > tol)
          throw std::invalid_argument("DenseHessian: not symmetric");
  }

  int size() const override { return n_; }

  void apply(const Vec& x, Vec& y) const override {
    y.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      const double* row = a_.data() + static_cast<std::size_t>(i) * n_;
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }

  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_;
  Vec a_;
};

// Sparse coordinate storage of the lower triangle (i >= j); the upper part
// is implied by symmetry. Duplicate entries accumulate.
class CooHessian final : public HessianOp {
 public:
  CooHessian(int n, std::vector<int> i, std::vector<int> j, Vec v)
      : n_(n), i_(std::move(i)), j_(std::move(j)), v_(std::move(v)) {
    if (i_.size() != j_.size() || i_.size() != v_.size())
      throw std::invalid_argument("CooHessian: index/value length mismatch");
    for (std::size_t k = 0; k < i_.size(); ++k) {
      if (i_[k] < 0 || i_[k] >= n_ || j_[k] < 0 || j_[k] >= n_)
        throw std::invalid_argument("CooHessian: index out of range");
      if (i_[k] < j_[k])
        throw std::invalid_argument("CooHessian: entry above the diagonal (store lower triangle only)");
      if (!std::isfinite(v_[k])) throw std::invalid_argument("CooHessian: nonfinite value");
    }
  }

  int size() const override { return n_; }

  void apply(const Vec& x, Vec& y) const override {
    y.assign(n_, 0.0);
    for (std::size_t k = 0; k < v_.size(); ++k) {
      const int i = i_[k], j = j_[k];
      y[i] += v_[k] * x[j];
      if (i != j) y[j] += v_[k] * x[i];
    }
  }

 private:
  int n_;
  std::vector<int> i_, j_;
  Vec v_;
};

struct LinearConstraint {
  Vec q;
  double b = 0.0;
};

struct Problem {
  int n = 0;
  std::shared_ptr<const HessianOp> H;
  Vec c;
  std::optional<LinearConstraint> eq;  // absent: plain box-constrained QP
  Vec l, u;                            // entries may be -inf / +inf
};

inline void validate(const Problem& p) {
  if (p.n <= 0) throw std::invalid_argument("Problem: n must be positive");
  if (!p.H || p.H->size() != p.n) throw std::invalid_argument("Problem: Hessian size mismatch");
  auto chk = [&](const Vec& v, const char* name) {
    if (v.size() != static_cast<std::size_t>(p.n))
      throw std::invalid_argument(std::string("Problem: bad length for ") + name);
  };
  chk(p.c, "c");
  chk(p.l, "l");
  chk(p.u, "u");
  for (double v : p.c)
    if (!std::isfinite(v)) throw std::invalid_argument("Problem: nonfinite entry in c");
  for (int i = 0; i < p.n; ++i) {
    if (std::isnan(p.l[i]) || std::isnan(p.u[i]))
      throw std::invalid_argument("Problem: NaN bound");
    if (p.l[i] > p.u[i]) throw std::invalid_argument("Problem: l > u");
  }
  if (p.eq) {
    chk(p.eq->q, "q");
    double qn = 0.0;
    for (double v : p.eq->q) {
      if (!std::isfinite(v)) throw std::invalid_argument("Problem: nonfinite entry in q");
      qn = std::max(qn, std::abs(v));
    }
    if (qn == 0.0) throw std::invalid_argument("Problem: q must be nonzero");
    if (!std::isfinite(p.eq->b)) throw std::invalid_argument("Problem: nonfinite b");
  }
}

inline void hessian_apply(const Problem& p, const Vec& x, Vec& y, Counters& cnt) {
  p.H->apply(x, y);
  ++cnt.matvecs;
}

// f given a cached product hx = H x; free of matvecs.
inline double objective_given_hx(const Problem& p, const Vec& x, const Vec& hx) {
  return 0.5 * dot(x, hx) - dot(p.c, x);
}

inline double objective(const Problem& p, const Vec& x, Counters& cnt) {
  Vec hx;
  hessian_apply(p, x, hx, cnt);
  ++cnt.objective_evals;
  return objective_given_hx(p, x, hx);
}

inline Vec gradient(const Problem& p, const Vec& x, Counters& cnt) {
  Vec g;
  hessian_apply(p, x, g, cnt);
  for (int i = 0; i < p.n; ++i) g[i] -= p.c[i];
  return g;
}

// A variable counts as attached to a bound when within this relative
// tolerance; projections and breakpoint steps write bound values exactly, so
// the tolerance only has to absorb drift from feasible arithmetic.
inline constexpr double kBoundAttachTol = 1e-12;

inline bool at_lower_bound(double xi, double li) {
  return li > -kInf && xi - li <= kBoundAttachTol * std::max(1.0, std::abs(li));
}

inline bool at_upper_bound(double xi, double ui) {
  return ui < kInf && ui - xi <= kBoundAttachTol * std::max(1.0, std::abs(ui));
}

struct ActiveSets {
  std::vector<std::uint8_t> at_lower, at_upper;  // size-n membership flags
  std::vector<int> lower_idx, upper_idx, free_idx;

  bool operator==(const ActiveSets& o) const {
    return at_lower == o.at_lower && at_upper == o.at_upper;
  }
  int active_count() const {
    return static_cast<int>(lower_idx.size() + upper_idx.size());
  }
};

// Classify each variable. A variable with l_i = u_i is attached on both
// sides; it is never free.
inline ActiveSets active_sets(const Problem& p, const Vec& x) {
  ActiveSets s;
  s.at_lower.assign(p.n, 0);
  s.at_upper.assign(p.n, 0);
  for (int i = 0; i < p.n; ++i) {
    const bool lo = at_lower_bound(x[i], p.l[i]);
    const bool hi = at_upper_bound(x[i], p.u[i]);
    s.at_lower[i] = lo;
    s.at_upper[i] = hi;
    if (lo) s.lower_idx.push_back(i);
    if (hi) s.upper_idx.push_back(i);
    if (!lo && !hi) s.free_idx.push_back(i);
  }
  return s;
}

}  // namespace slbqp
