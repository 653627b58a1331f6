#pragma once

// Solver configuration shared by the identification phase, the reduced-space
// solvers and the driver.

#include <string>

#include "stationarity.hpp"
#include "steplength.hpp"

namespace slbqp {

enum class Mode { p2gp_cg, p2gp_sdc, gpcg_like, pabbmin };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::p2gp_cg: return "p2gp-cg";
    case Mode::p2gp_sdc: return "p2gp-sdc";
    case Mode::gpcg_like: return "gpcg-like";
    case Mode::pabbmin: return "pabbmin";
  }
  return "?";
}

inline Mode mode_from_name(const std::string& s) {
  if (s == "p2gp-cg") return Mode::p2gp_cg;
  if (s == "p2gp-sdc") return Mode::p2gp_sdc;
  if (s == "gpcg-like") return Mode::gpcg_like;
  if (s == "pabbmin") return Mode::pabbmin;
  throw std::invalid_argument("unknown method '" + s + "'");
}

// relative_split_norm: stop when ||phi+beta||_2 <= tol * ||phi0+beta0||_2
// inf_norm_pg:         stop when ||phi+beta||_inf < tol
enum class TolMode { relative_split_norm, inf_norm_pg };

struct Caps {
  std::int64_t max_matvecs = 30000;
  std::int64_t max_projections = 30000;
  int max_consecutive = 50;  // per-phase iteration cap
};

struct SolverConfig {
  Mode mode = Mode::p2gp_cg;
  TolMode tol_mode = TolMode::relative_split_norm;
  double tol = 1e-6;

  double eta = 0.1;          // identification-phase progress fraction
  double xi = 0.5;           // inner-solver progress fraction
  double xi_gpcg_like = 0.25;  // tighter inner stop used by the gpcg-like mode
  double gamma0 = 1.0;
  bool adaptive_gamma = true;

  int bb_window = 3;     // q in the ABBmin rule
  double bb_tau = 0.2;   // fixed tau for the two-phase methods
  int sdc_kbar = 6;
  int sdc_ell = 4;

  // adaptive tau for the pure projected-BB solver
  double ptau0 = 0.5;
  double ptau_shrink = 0.9;
  double ptau_grow = 1.1;
  double ptau_min = 0.02;
  double ptau_max = 1.0;

  LineSearchParams ls;
  ProjectionParams proj;
  Caps caps;
};

// Resolved convergence test: the threshold is fixed once, from the split at
// the projected starting point.
struct ConvergeTest {
  TolMode mode = TolMode::relative_split_norm;
  double threshold = 0.0;

  static ConvergeTest from_initial(const SolverConfig& cfg, const GradientSplit& sp0) {
    ConvergeTest t;
    t.mode = cfg.tol_mode;
    t.threshold = (cfg.tol_mode == TolMode::relative_split_norm) ? cfg.tol * sp0.measure : cfg.tol;
    return t;
  }

  bool ok(const GradientSplit& sp) const {
    if (mode == TolMode::relative_split_norm) return sp.measure <= threshold;
    return sp.measure_inf < threshold;
  }
};

// Two consecutive exhausted line searches mean the iteration cannot make
// progress in floating point; the driver then stops with status "stalled".
struct StallTracker {
  int consecutive_failures = 0;
  void record(bool satisfied) { consecutive_failures = satisfied ? 0 : consecutive_failures + 1; }
  bool tripped() const { return consecutive_failures >= 2; }
};

inline bool budget_left(const Caps& caps, const Counters& cnt) {
  return cnt.matvecs < caps.max_matvecs && cnt.projections < caps.max_projections;
}

}  // namespace slbqp
