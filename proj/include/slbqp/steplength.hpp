#pragma once

// Steplength rules and the projected backtracking line search.

#include <deque>
#include <functional>
#include <optional>

#include "problem.hpp"

namespace slbqp {

// Barzilai-Borwein steps from a step pair s = x+ - x, y = g+ - g.
//   bb1 = s's / s'y,  bb2 = s'y / y'y
// Undefined when a denominator is nonpositive or underflows (|den| <= 1e-300).
struct BBPair {
  std::optional<double> bb1, bb2;
};

inline BBPair bb_steps(const Vec& s, const Vec& y) {
  BBPair r;
  const double sy = dot(s, y);
  if (sy > 1e-300) {
    const double ss = dot(s, s);
    const double yy = dot(y, y);
    if (ss > 0.0) r.bb1 = ss / sy;
    if (yy > 1e-300) r.bb2 = sy / yy;
  }
  return r;
}

// ABBmin: keep a short history of bb2 values and return
//   min over the last q+1 bb2 values   when bb2/bb1 < tau
//   bb1                                otherwise.
// The memory is cleared at the start of each identification phase, so the
// window never reaches back across a phase switch.
class SteplengthMemory {
 public:
  explicit SteplengthMemory(int window = 3) : window_(window) {}

  void reset() {
    bb2_hist_.clear();
    last_ = BBPair{};
  }

  // Record an accepted step pair. Only defined positive bb2 values enter the
  // history; an undefined pair leaves the history unchanged and makes the
  // next abbmin() call report "no step".
  void push(const Vec& s, const Vec& y) {
    last_ = bb_steps(s, y);
    if (last_.bb2 && *last_.bb2 > 0.0) {
      bb2_hist_.push_back(*last_.bb2);
      while (static_cast<int>(bb2_hist_.size()) > window_ + 1) bb2_hist_.pop_front();
    }
  }

  bool has_pair() const { return last_.bb1 && last_.bb2; }

  std::optional<double> abbmin(double tau) const {
    if (!last_.bb1 || !last_.bb2) return std::nullopt;
    const double b1 = *last_.bb1, b2 = *last_.bb2;
    if (b1 <= 0.0 || b2 <= 0.0) return std::nullopt;
    if (b2 / b1 < tau) {
      double m = b2;
      for (double v : bb2_hist_) m = std::min(m, v);
      return m;
    }
    return b1;
  }

  // True when the last abbmin() took the min-of-bb2 branch; used by the
  // adaptive tau rule of the pure gradient-projection solver.
  bool min_branch(double tau) const {
    return last_.bb1 && last_.bb2 && *last_.bb1 > 0.0 && *last_.bb2 / *last_.bb1 < tau;
  }

 private:
  int window_;
  std::deque<double> bb2_hist_;
  BBPair last_;
};

inline double cauchy_step(double gg, double gHg) { return gg / gHg; }

// Yuan steplength from the last two Cauchy steps and gradient norms.
inline double yuan_step(double sd_prev, double sd_cur, double gnorm_prev, double gnorm_cur) {
  const double a = 1.0 / sd_prev - 1.0 / sd_cur;
  const double t = gnorm_cur / (sd_prev * gnorm_prev);
  return 2.0 / (std::sqrt(a * a + 4.0 * t * t) + 1.0 / sd_prev + 1.0 / sd_cur);
}

// SDC schedule: kbar Cauchy steps, then ell iterations reusing the Yuan step
// computed at the start of the constant block.
enum class SdcChoice { cauchy, yuan_fresh, yuan_reuse };

inline SdcChoice sdc_schedule(int k, int kbar, int ell) {
  const int pos = k % (kbar + ell);
  if (pos < kbar) return SdcChoice::cauchy;
  return pos == kbar ? SdcChoice::yuan_fresh : SdcChoice::yuan_reuse;
}

struct LineSearchParams {
  double mu1 = 1e-4;        // sufficient decrease slope fraction
  double alpha_max = 1e12;  // clamp for the first trial
  double alpha_min = 1e-12;
  double gamma3 = 1e-2;  // retained from the classical parameter set; the
                         // [backtrack_lo, backtrack_hi] bracket subsumes it
  double backtrack_lo = 0.5;
  double backtrack_hi = 0.95;
  int max_backtracks = 50;
};

struct LineSearchResult {
  Vec x;
  double f = 0.0;
  double alpha = 0.0;
  int trials = 0;
  bool satisfied = false;
  bool moved = false;
};

// Backtracking search over alpha for x(alpha) = P(x + alpha*dir), accepting
//   f(x(alpha)) <= f(x) + mu1 * grad'(x(alpha) - x).
// Each trial costs one projection and one objective evaluation. Backtracks
// pick the quadratic-interpolation minimizer clamped into
// [backtrack_lo * alpha, backtrack_hi * alpha]. On exhaustion the best
// strictly-decreasing trial (if any) is returned with satisfied = false.
inline LineSearchResult line_search_along(const Problem& p, const Vec& x, double fx,
                                          const Vec& grad, const Vec& dir, double alpha0,
                                          const LineSearchParams& ls,
                                          const std::function<Vec(const Vec&)>& project_fn,
                                          Counters& cnt) {
  LineSearchResult best;
  best.x = x;
  best.f = fx;

  const double slope0 = dot(grad, dir);
  double alpha = std::min(std::max(alpha0, ls.alpha_min), ls.alpha_max);
  Vec trial(p.n);
  for (int t = 1; t <= ls.max_backtracks; ++t) {
    for (int i = 0; i < p.n; ++i) trial[i] = x[i] + alpha * dir[i];
    Vec xt = project_fn(trial);
    const double ft = objective(p, xt, cnt);
    double dec = 0.0;
    for (int i = 0; i < p.n; ++i) dec += grad[i] * (xt[i] - x[i]);
    if (std::isfinite(ft)) {
      if (ft <= fx + ls.mu1 * dec) {
        best.moved = (xt != x);  // a projected trial can land exactly on x
        best.x = std::move(xt);
        best.f = ft;
        best.alpha = alpha;
        best.trials = t;
        best.satisfied = true;
        return best;
      }
      if (ft < best.f) {
        best.x = xt;
        best.f = ft;
        best.alpha = alpha;
        best.moved = true;
      }
    }
    // quadratic model through f(0) = fx, slope0, f(alpha) = ft
    double next = ls.backtrack_lo * alpha;
    if (std::isfinite(ft) && slope0 < 0.0) {
      const double denom = ft - fx - slope0 * alpha;
      if (denom > 0.0) {
        const double astar = -0.5 * slope0 * alpha * alpha / denom;
        next = std::min(std::max(astar, ls.backtrack_lo * alpha), ls.backtrack_hi * alpha);
      }
    }
    alpha = next;
    best.trials = t;
    if (alpha < ls.alpha_min) break;
  }
  return best;
}

// Canonical form used by the gradient-projection iteration: step along -grad.
inline LineSearchResult sufficient_decrease_search(const Problem& p, const Vec& x, double fx,
                                                   const Vec& grad, double alpha0,
                                                   const LineSearchParams& ls,
                                                   const std::function<Vec(const Vec&)>& project_fn,
                                                   Counters& cnt) {
  Vec dir(p.n);
  for (int i = 0; i < p.n; ++i) dir[i] = -grad[i];
  return line_search_along(p, x, fx, grad, dir, alpha0, ls, project_fn, cnt);
}

}  // namespace slbqp
