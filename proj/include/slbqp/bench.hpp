#pragma once

// Benchmark run records (CSV) and performance profiles.
//
// A profile compares methods over a problem set: for problem p and method s
// with cost t_{p,s}, the ratio is r_{p,s} = t_{p,s} / min_s' t_{p,s'} and
// the profile value pi_s(chi) is the fraction of problems with r_{p,s} <=
// chi. Failed runs get an infinite ratio; problems failed by every method
// are excluded (and counted so callers can warn). Each (problem, start)
// pair counts as one problem.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "solver.hpp"

namespace slbqp {

struct RunRecord {
  std::string method;
  std::string problem_id;
  std::uint64_t seed = 0;
  double nax0 = 0.0;
  std::string status;
  double f_final = 0.0;
  double kkt_measure = 0.0;
  std::int64_t matvecs = 0;
  std::int64_t projections = 0;
  std::int64_t outer_iters = 0;
  double time_ms = 0.0;
};

inline constexpr const char* kRunCsvHeader =
    "method,problem_id,seed,nax0,status,f_final,kkt_measure,matvecs,projections,outer_iters,"
    "time_ms";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<RunRecord>& recs) {
  os << kRunCsvHeader << "\n";
  for (const auto& r : recs) {
    os << r.method << ',' << r.problem_id << ',' << r.seed << ',' << detail::fmt_double(r.nax0)
       << ',' << r.status << ',' << detail::fmt_double(r.f_final) << ','
       << detail::fmt_double(r.kkt_measure) << ',' << r.matvecs << ',' << r.projections << ','
       << r.outer_iters << ',' << detail::fmt_double(r.time_ms) << "\n";
  }
}

inline void write_csv(const std::string& path, const std::vector<RunRecord>& recs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(os, recs);
}

inline std::vector<RunRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("run CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunCsvHeader) throw std::runtime_error("run CSV: unexpected header '" + line + "'");
  std::vector<RunRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 11)
      throw std::runtime_error("run CSV line " + std::to_string(line_no) + ": expected 11 fields, got " +
                               std::to_string(f.size()));
    RunRecord r;
    try {
      r.method = f[0];
      r.problem_id = f[1];
      r.seed = std::stoull(f[2]);
      r.nax0 = std::stod(f[3]);
      r.status = f[4];
      r.f_final = std::stod(f[5]);
      r.kkt_measure = std::stod(f[6]);
      r.matvecs = std::stoll(f[7]);
      r.projections = std::stoll(f[8]);
      r.outer_iters = std::stoll(f[9]);
      r.time_ms = std::stod(f[10]);
    } catch (const std::exception& e) {
      throw std::runtime_error("run CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RunRecord> read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(is);
}

enum class ProfileMetric { time, matvecs, projections };

inline const char* metric_name(ProfileMetric m) {
  switch (m) {
    case ProfileMetric::time: return "time";
    case ProfileMetric::matvecs: return "matvecs";
    case ProfileMetric::projections: return "projections";
  }
  return "?";
}

inline double metric_value(const RunRecord& r, ProfileMetric m) {
  switch (m) {
    case ProfileMetric::time: return r.time_ms;
    case ProfileMetric::matvecs: return static_cast<double>(r.matvecs);
    case ProfileMetric::projections: return static_cast<double>(r.projections);
  }
  return 0.0;
}

struct ProfileTable {
  std::vector<std::string> methods;
  Vec chi;                            // evaluation grid, chi[0] = 1
  std::vector<Vec> values;            // values[m][k] = pi_{methods[m]}(chi[k])
  int problems_included = 0;
  int problems_excluded = 0;          // failed by every method
  std::vector<std::string> warnings;  // one per excluded problem
};

// Profiles treat a run as successful only when it reports convergence.
inline bool run_succeeded(const RunRecord& r) { return r.status == "converged"; }

inline ProfileTable performance_profile(const std::vector<RunRecord>& recs, ProfileMetric metric,
                                        int grid_points = 64) {
  if (grid_points < 2) throw std::invalid_argument("performance_profile: grid_points must be >= 2");
  ProfileTable pt;

  for (const auto& r : recs)
    if (std::find(pt.methods.begin(), pt.methods.end(), r.method) == pt.methods.end())
      pt.methods.push_back(r.method);
  std::sort(pt.methods.begin(), pt.methods.end());
  const int nm = static_cast<int>(pt.methods.size());
  if (nm == 0) throw std::invalid_argument("performance_profile: no records");
  auto method_index = [&](const std::string& m) {
    return static_cast<int>(std::find(pt.methods.begin(), pt.methods.end(), m) - pt.methods.begin());
  };

  // One problem per (problem_id, start density); keep the cost per method.
  std::map<std::pair<std::string, std::string>, Vec> per_problem;
  for (const auto& r : recs) {
    auto key = std::make_pair(r.problem_id, detail::fmt_double(r.nax0));
    auto [it, inserted] = per_problem.try_emplace(key, Vec(nm, kInf));
    const double cost = run_succeeded(r) ? metric_value(r, metric) : kInf;
    it->second[method_index(r.method)] = cost;
  }

  // Ratios to the per-problem best.
  std::vector<Vec> ratios;  // [problem][method]
  double rmax = 1.0;
  for (const auto& [key, costs] : per_problem) {
    double best = kInf;
    for (double c : costs) best = std::min(best, c);
    if (!std::isfinite(best)) {
      ++pt.problems_excluded;
      pt.warnings.push_back("problem " + key.first + " (start " + key.second +
                            ") failed for every method; excluded from the profile");
      continue;
    }
    Vec r(nm);
    for (int m = 0; m < nm; ++m) {
      // A best cost of zero can happen for trivially solved problems; treat
      // equal-zero costs as ratio 1.
      r[m] = costs[m] == best ? 1.0 : costs[m] / (best > 0.0 ? best : 1.0);
      if (std::isfinite(r[m])) rmax = std::max(rmax, r[m]);
    }
    ratios.push_back(std::move(r));
  }
  pt.problems_included = static_cast<int>(ratios.size());
  if (pt.problems_included == 0) throw std::runtime_error("performance_profile: every problem failed");

  pt.chi.resize(grid_points);
  for (int k = 0; k < grid_points; ++k)
    pt.chi[k] = std::pow(rmax, static_cast<double>(k) / (grid_points - 1));

  pt.values.assign(nm, Vec(grid_points, 0.0));
  for (int m = 0; m < nm; ++m)
    for (int k = 0; k < grid_points; ++k) {
      int count = 0;
      for (const auto& r : ratios)
        if (r[m] <= pt.chi[k] * (1.0 + 1e-12)) ++count;
      pt.values[m][k] = static_cast<double>(count) / pt.problems_included;
    }
  return pt;
}

inline void write_profile_tsv(std::ostream& os, const ProfileTable& pt) {
  os << "chi";
  for (const auto& m : pt.methods) os << '\t' << m;
  os << "\n";
  for (std::size_t k = 0; k < pt.chi.size(); ++k) {
    os << detail::fmt_double(pt.chi[k]);
    for (std::size_t m = 0; m < pt.methods.size(); ++m) os << '\t' << detail::fmt_double(pt.values[m][k]);
    os << "\n";
  }
}

inline void write_profile_tsv(const std::string& path, const ProfileTable& pt) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_profile_tsv(os, pt);
}

}  // namespace slbqp
