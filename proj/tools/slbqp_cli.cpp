// Command-line front end: generate problems, solve them, run benchmark
// sweeps with performance profiles, and solve SVM duals from LIBSVM files.
//
// Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O error.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "slbqp/slbqp.hpp"

namespace {

using nlohmann::json;
using namespace slbqp;

json report_to_json(const SolveReport& rep, double time_ms, bool include_x) {
  json j;
  j["status"] = status_name(rep.status);
  j["f"] = rep.f;
  j["kkt_measure"] = rep.kkt_measure;
  j["kkt_measure_inf"] = rep.kkt_measure_inf;
  j["matvecs"] = rep.counters.matvecs;
  j["projections"] = rep.counters.projections;
  j["objective_evals"] = rep.counters.objective_evals;
  j["outer_iterations"] = rep.outer_iterations;
  j["gamma_final"] = rep.gamma_final;
  j["time_ms"] = time_ms;
  if (include_x) j["x"] = rep.x;
  j["rho"] = rep.multipliers.rho;
  if (include_x) j["lambda"] = rep.multipliers.lambda;
  if (!rep.ray.empty()) j["ray"] = rep.ray;
  json phases = json::array();
  for (const auto& t : rep.trace) {
    phases.push_back(json{{"phase", std::string(1, t.phase)},
                          {"iterations", t.iterations},
                          {"f_drop", t.f_drop},
                          {"actives", t.actives}});
  }
  j["phases"] = phases;
  return j;
}

json sidecar_json(const GeneratedInstance& inst) {
  json j;
  j["x_star"] = inst.x_star;
  j["lambda_star"] = inst.lambda_star;
  j["rho_star"] = inst.rho_star;
  j["seed"] = inst.params.seed;
  j["x0"] = inst.x0;
  return j;
}

struct GenFlags {
  GenParams g;
  void attach(CLI::App* cmd) {
    cmd->add_option("--n", g.n, "problem size")->check(CLI::Range(2, 1 << 24));
    cmd->add_option("--ncond", g.ncond, "log10 condition number of H");
    cmd->add_option("--naxsol", g.naxsol, "planted active fraction")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--ndeg", g.ndeg, "multiplier decay exponent");
    cmd->add_option("--zeroeig", g.zeroeig, "zero eigenvalue fraction")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--negeig", g.negeig, "negative eigenvalue fraction")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--degvar", g.degvar, "degenerate fraction of planted actives")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--nax0", g.nax0, "fraction of variables starting on a bound")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--linear,!--no-linear", g.linear, "include the linear equality constraint");
    cmd->add_option("--seed", g.seed, "random seed");
  }
};

struct SolveFlags {
  std::string mode = "p2gp-cg";
  std::string tol_mode = "relative";
  double tol = 1e-6;
  std::int64_t max_matvecs = 30000;
  std::int64_t max_projections = 30000;
  bool fixed_gamma = false;
  double gamma0 = 1.0;
  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "solver mode")
        ->check(CLI::IsMember({"p2gp-cg", "p2gp-sdc", "gpcg-like", "pabbmin"}));
    cmd->add_option("--tol", tol, "stopping tolerance");
    cmd->add_option("--tol-mode", tol_mode, "stopping rule: relative |phi+beta| or inf-norm")
        ->check(CLI::IsMember({"relative", "inf"}));
    cmd->add_option("--max-matvecs", max_matvecs, "matvec budget");
    cmd->add_option("--max-projections", max_projections, "projection budget");
    cmd->add_flag("--fixed-gamma", fixed_gamma, "disable the adaptive proportionality constant");
    cmd->add_option("--gamma", gamma0, "initial proportionality constant");
  }
  SolverConfig config() const {
    SolverConfig cfg;
    cfg.mode = mode_from_name(mode);
    cfg.tol = tol;
    cfg.tol_mode = tol_mode == "inf" ? TolMode::inf_norm_pg : TolMode::relative_split_norm;
    cfg.caps.max_matvecs = max_matvecs;
    cfg.caps.max_projections = max_projections;
    cfg.adaptive_gamma = !fixed_gamma;
    cfg.gamma0 = gamma0;
    return cfg;
  }
};

int exit_code_for(SolveStatus st) {
  switch (st) {
    case SolveStatus::converged:
    case SolveStatus::unbounded: return 0;  // definitive answers
    default: return 2;
  }
}

Vec load_x0_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j = json::parse(in);
  if (j.is_object() && j.contains("x0")) j = j["x0"];
  Vec x0 = j.get<Vec>();
  if (static_cast<int>(x0.size()) != n)
    throw std::runtime_error("x0 in '" + path + "' has length " + std::to_string(x0.size()) +
                             ", expected " + std::to_string(n));
  return x0;
}

struct BenchJob {
  GenParams params;
  std::string suite;
  double nax0;
  Mode mode;
};

int run_bench(const std::vector<std::string>& suites, int n, bool linear,
              const std::vector<std::string>& modes, const std::vector<double>& starts,
              std::uint64_t seed, const SolveFlags& sf, const std::string& out_dir, int threads) {
  std::vector<BenchJob> jobs;
  for (const auto& sname : suites) {
    const auto params = suite(suite_from_name(sname), n, linear, seed);
    for (const auto& g : params)
      for (double s : starts)
        for (const auto& m : modes) {
          BenchJob job;
          job.params = g;
          job.params.nax0 = s;
          job.suite = sname;
          job.nax0 = s;
          job.mode = mode_from_name(m);
          jobs.push_back(job);
        }
  }

  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const BenchJob& job = jobs[i];
      RunRecord rec;
      rec.method = mode_name(job.mode);
      rec.seed = job.params.seed;
      rec.nax0 = job.nax0;
      try {
        const auto inst = generate(job.params);
        rec.problem_id = job.suite + ":" + inst.id;
        SolverConfig cfg = sf.config();
        cfg.mode = job.mode;
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = solve(inst.problem, inst.x0, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        rec.status = status_name(rep.status);
        rec.f_final = rep.f;
        rec.kkt_measure = rep.kkt_measure;
        rec.matvecs = rep.counters.matvecs;
        rec.projections = rep.counters.projections;
        rec.outer_iters = rep.outer_iterations;
        rec.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      } catch (const std::exception& e) {
        rec.problem_id = job.suite + ":" + instance_id(job.params);
        rec.status = "error";
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << "warning: " << rec.method << " on " << rec.problem_id << " threw: " << e.what()
                  << "\n";
      }
      records[i] = std::move(rec);
    }
  };
  if (threads < 1) threads = 1;
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.method, a.problem_id, a.nax0) < std::tie(b.method, b.problem_id, b.nax0);
  });

  std::filesystem::create_directories(out_dir);
  write_csv(out_dir + "/records.csv", records);
  for (auto metric : {ProfileMetric::time, ProfileMetric::matvecs, ProfileMetric::projections}) {
    try {
      const auto pt = performance_profile(records, metric);
      for (const auto& w : pt.warnings) std::cerr << "warning: " << w << "\n";
      write_profile_tsv(out_dir + "/profile_" + std::string(metric_name(metric)) + ".tsv", pt);
    } catch (const std::exception& e) {
      std::cerr << "warning: no " << metric_name(metric) << " profile: " << e.what() << "\n";
    }
  }
  std::cout << "wrote " << records.size() << " runs to " << out_dir << "/records.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver and benchmark harness for box-constrained quadratic programs with one "
               "linear equality constraint"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen_cmd = app.add_subcommand("gen", "generate a problem (or a whole suite) as JSON");
  GenFlags gen_flags;
  gen_flags.attach(gen_cmd);
  std::string gen_out = "problem.json";
  std::string gen_suite, gen_out_dir = ".";
  gen_cmd->add_option("--out", gen_out, "output problem file (single-instance mode)");
  gen_cmd->add_option("--suite", gen_suite,
                      "generate a full suite (sconv_nondeg, sconv_deg, convex, nonconvex)")
      ->check(CLI::IsMember({"sconv_nondeg", "sconv_deg", "convex", "nonconvex"}));
  gen_cmd->add_option("--out-dir", gen_out_dir, "output directory (suite mode)");

  // --- solve ---
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem file or a generated instance");
  std::string solve_file, solve_x0_file, solve_out;
  bool solve_no_x = false;
  solve_cmd->add_option("problem", solve_file, "problem JSON file (omit to use generator flags)");
  GenFlags solve_gen;
  solve_gen.attach(solve_cmd);
  SolveFlags solve_flags;
  solve_flags.attach(solve_cmd);
  solve_cmd->add_option("--x0", solve_x0_file, "JSON file with the starting point");
  solve_cmd->add_option("--out", solve_out, "write the report here instead of stdout");
  solve_cmd->add_flag("--no-x", solve_no_x, "omit x and lambda from the report");

  // --- bench ---
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep and emit profiles");
  std::vector<std::string> bench_suites{"sconv_nondeg"};
  std::vector<std::string> bench_modes{"p2gp-cg", "p2gp-sdc", "gpcg-like", "pabbmin"};
  std::vector<double> bench_starts{0.0, 0.1, 0.5, 0.9};
  int bench_n = 500, bench_threads = static_cast<int>(std::thread::hardware_concurrency());
  bool bench_linear = true;
  std::uint64_t bench_seed = 1;
  std::string bench_out_dir = "bench_out";
  SolveFlags bench_flags;
  bench_cmd->add_option("--suite", bench_suites, "suites to run")->delimiter(',');
  bench_cmd->add_option("--modes", bench_modes, "solver modes to compare")->delimiter(',');
  bench_cmd->add_option("--starts", bench_starts, "starting-point densities")->delimiter(',');
  bench_cmd->add_option("--n", bench_n, "problem size")->check(CLI::Range(2, 1 << 24));
  bench_cmd->add_flag("--linear,!--no-linear", bench_linear, "include the equality constraint");
  bench_cmd->add_option("--seed", bench_seed, "base seed");
  bench_cmd->add_option("--out-dir", bench_out_dir, "output directory");
  bench_cmd->add_option("--threads", bench_threads, "worker threads");
  bench_flags.attach(bench_cmd);

  // --- svm ---
  auto* svm_cmd = app.add_subcommand("svm", "solve the dual of a linear C-SVM from a LIBSVM file");
  std::string svm_file, svm_out;
  double svm_C = 10.0;
  bool svm_no_x = false;
  SolveFlags svm_flags;
  svm_flags.tol = 1e-3;
  svm_flags.tol_mode = "inf";
  svm_cmd->add_option("data", svm_file, "LIBSVM data file")->required();
  svm_cmd->add_option("--C", svm_C, "box upper bound");
  svm_flags.attach(svm_cmd);
  svm_cmd->add_option("--out", svm_out, "write the report here instead of stdout");
  svm_cmd->add_flag("--no-x", svm_no_x, "omit alpha and lambda from the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen_cmd->parsed()) {
      if (!gen_suite.empty()) {
        std::filesystem::create_directories(gen_out_dir);
        const auto params = suite(suite_from_name(gen_suite), gen_flags.g.n, gen_flags.g.linear,
                                  gen_flags.g.seed);
        for (auto g : params) {
          g.nax0 = gen_flags.g.nax0;
          const auto inst = generate(g);
          if (!inst.warning.empty()) std::cerr << "warning: " << inst.warning << "\n";
          const std::string base = gen_out_dir + "/" + gen_suite + "_" + inst.id;
          save_json(problem_to_json_dense(inst.problem), base + ".json");
          save_json(sidecar_json(inst), base + ".solution.json");
        }
        std::cout << "wrote " << params.size() << " instances to " << gen_out_dir << "\n";
      } else {
        const auto inst = generate(gen_flags.g);
        if (!inst.warning.empty()) std::cerr << "warning: " << inst.warning << "\n";
        save_json(problem_to_json_dense(inst.problem), gen_out);
        const auto dot = gen_out.rfind('.');
        const std::string base = dot == std::string::npos ? gen_out : gen_out.substr(0, dot);
        save_json(sidecar_json(inst), base + ".solution.json");
        std::cout << "wrote " << gen_out << " (id " << inst.id << ")\n";
      }
      return 0;
    }

    if (solve_cmd->parsed() || svm_cmd->parsed()) {
      Problem problem;
      Vec x0;
      const SolveFlags& sf = svm_cmd->parsed() ? svm_flags : solve_flags;
      if (svm_cmd->parsed()) {
        problem = build_svm_dual(load_libsvm(svm_file), svm_C);
        x0.assign(problem.n, 0.0);
      } else if (!solve_file.empty()) {
        problem = load_problem(solve_file);
        x0.assign(problem.n, 0.0);
      } else {
        const auto inst = generate(solve_gen.g);
        if (!inst.warning.empty()) std::cerr << "warning: " << inst.warning << "\n";
        problem = inst.problem;
        x0 = inst.x0;
      }
      if (!solve_x0_file.empty()) x0 = load_x0_file(solve_x0_file, problem.n);

      const auto t0 = std::chrono::steady_clock::now();
      const auto rep = solve(problem, x0, sf.config());
      const auto t1 = std::chrono::steady_clock::now();
      const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

      const bool no_x = svm_cmd->parsed() ? svm_no_x : solve_no_x;
      const json j = report_to_json(rep, ms, !no_x);
      const std::string& out = svm_cmd->parsed() ? svm_out : solve_out;
      if (out.empty())
        std::cout << j.dump(2) << "\n";
      else
        save_json(j, out);
      return exit_code_for(rep.status);
    }

    if (bench_cmd->parsed()) {
      return run_bench(bench_suites, bench_n, bench_linear, bench_modes, bench_starts, bench_seed,
                       bench_flags, bench_out_dir, bench_threads);
    }
  } catch (const ProjectionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CurvatureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    // Runtime errors here come from file handling and parsing.
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
