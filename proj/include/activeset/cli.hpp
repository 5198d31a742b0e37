// Command-line front end: flat key=value config files, flag parsing with
// flags-over-file precedence, and the four subcommand drivers.
#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "activeset/experiments.hpp"
#include "activeset/lp_identify.hpp"
#include "activeset/png.hpp"
#include "activeset/qp.hpp"
#include "activeset/report.hpp"
#include "activeset/selfcheck.hpp"

namespace activeset {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string problem = "f1";
  std::vector<double> eps_levels;  // empty -> {0}
  int trials = 8;
  LpLpecParams lp;  // M = 1e8, beta = 0.7071, sigma = 0.7
  QpParams qp;      // nu = 100, theta = 5
  std::uint64_t seed = 0;
  std::string out = ".";
  bool png = false;
  bool quick = false;
  double half_width = 0.4;
  int resolution = 81;
  double mu = 100.0;
  int threads = 0;
  Vec point;  // identify target, "--x a,b"
};

namespace cli_detail {

inline double parse_num(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw usage_error(key + ": expected a number, got '" + val + "'");
  }
}

inline long parse_int(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw usage_error(key + ": expected an integer, got '" + val + "'");
  }
}

inline std::vector<double> parse_num_list(const std::string& key, const std::string& val) {
  std::vector<double> out;
  std::istringstream ss(val);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_num(key, item));
  if (out.empty()) throw usage_error(key + ": empty list");
  return out;
}

inline std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw usage_error("config: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw usage_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const std::size_t a = s.find_first_not_of(" \t");
      const std::size_t z = s.find_last_not_of(" \t");
      s = (a == std::string::npos) ? std::string() : s.substr(a, z - a + 1);
    };
    trim(key);
    trim(val);
    if (key.empty()) throw usage_error(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  return kv;
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& val) {
  if (key == "problem") {
    cfg.problem = val;
  } else if (key == "eps") {
    cfg.eps_levels = parse_num_list(key, val);
  } else if (key == "trials") {
    cfg.trials = static_cast<int>(parse_int(key, val));
  } else if (key == "M") {
    cfg.lp.M = parse_num(key, val);
  } else if (key == "beta") {
    cfg.lp.beta = parse_num(key, val);
  } else if (key == "sigma") {
    cfg.lp.sigma = parse_num(key, val);
  } else if (key == "nu") {
    cfg.qp.nu = parse_num(key, val);
  } else if (key == "theta") {
    cfg.qp.theta = parse_num(key, val);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, val));
  } else if (key == "out") {
    cfg.out = val;
  } else if (key == "png") {
    if (val == "true" || val == "1")
      cfg.png = true;
    else if (val == "false" || val == "0")
      cfg.png = false;
    else
      throw usage_error("png: expected true/false, got '" + val + "'");
  } else if (key == "quick") {
    cfg.quick = (val == "true" || val == "1");
  } else if (key == "half_width") {
    cfg.half_width = parse_num(key, val);
  } else if (key == "resolution") {
    cfg.resolution = static_cast<int>(parse_int(key, val));
  } else if (key == "mu") {
    cfg.mu = parse_num(key, val);
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(key, val));
  } else if (key == "x") {
    cfg.point = parse_num_list(key, val);
  } else {
    throw usage_error("unknown configuration key: " + key);
  }
}

inline void validate(const RunConfig& cfg) {
  if (cfg.problem != "f1" && cfg.problem != "f2")
    throw usage_error("problem: expected f1 or f2, got '" + cfg.problem + "'");
  if (!(cfg.lp.sigma > 0.0 && cfg.lp.sigma < 1.0))
    throw usage_error("sigma: must lie strictly between 0 and 1");
  if (!(cfg.lp.M > 0.0)) throw usage_error("M: must be positive");
  if (!(cfg.lp.beta > 0.0)) throw usage_error("beta: must be positive");
  if (!(cfg.qp.nu > 0.0)) throw usage_error("nu: must be positive");
  if (!(cfg.qp.theta > 0.0)) throw usage_error("theta: must be positive");
  if (cfg.trials < 1) throw usage_error("trials: must be >= 1");
  if (cfg.resolution < 2) throw usage_error("resolution: must be >= 2");
  if (!(cfg.half_width > 0.0)) throw usage_error("half_width: must be positive");
  if (!(cfg.mu > 0.0)) throw usage_error("mu: must be positive");
  for (double e : cfg.eps_levels)
    if (e < 0.0) throw usage_error("eps: noise levels must be nonnegative");
}

}  // namespace cli_detail

inline const char* cli_usage() {
  return
      "usage: activeset-id <heatmap|trajectory|identify|verify> [options]\n"
      "\n"
      "options (flags override --config file entries):\n"
      "  --config FILE      flat key=value file, one entry per line, # comments\n"
      "  --problem NAME     f1 or f2 (default f1)\n"
      "  --eps LIST         comma-separated noise levels (default 0)\n"
      "  --trials N         noisy trials per point (default 8)\n"
      "  --M V              multiplier box bound (default 1e8)\n"
      "  --beta V           threshold scale (default 0.7071)\n"
      "  --sigma V          threshold exponent in (0,1) (default 0.7)\n"
      "  --nu V             slack penalty weight (default 100)\n"
      "  --theta V          step curvature weight (default 5)\n"
      "  --seed N           master seed (default 0)\n"
      "  --out DIR          output directory (default .)\n"
      "  --png              also render PNG rasters of heatmap CSVs\n"
      "  --half-width V     grid half-width per axis (default 0.4)\n"
      "  --resolution N     grid points per axis (default 81)\n"
      "  --mu V             penalty parameter for trajectory (default 100)\n"
      "  --threads N        worker threads (default: ACTIVESET_ID_THREADS or cores)\n"
      "  --x A,B            evaluation point for identify\n"
      "  --quick            reduced instance counts for verify\n";
}

/// Parses argv (without the program name).  Precedence: defaults, then
/// --config file entries, then the remaining flags in order.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  using namespace cli_detail;
  if (args.empty()) throw usage_error("missing subcommand");
  RunConfig cfg;
  cfg.subcommand = args[0];
  if (cfg.subcommand != "heatmap" && cfg.subcommand != "trajectory" &&
      cfg.subcommand != "identify" && cfg.subcommand != "verify")
    throw usage_error("unknown subcommand: " + cfg.subcommand);

  // pass 1: config file, lowest precedence after defaults
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw usage_error("--config: missing file path");
      for (const auto& [k, v] : load_config_file(args[i + 1])) apply_key(cfg, k, v);
    }
  }

  // pass 2: flags
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      ++i;  // handled above
      continue;
    }
    if (a == "--png") {
      cfg.png = true;
      continue;
    }
    if (a == "--quick") {
      cfg.quick = true;
      continue;
    }
    if (a.rfind("--", 0) != 0) throw usage_error("unexpected argument: " + a);
    if (i + 1 >= args.size()) throw usage_error(a + ": missing value");
    std::string key = a.substr(2);
    for (char& ch : key)
      if (ch == '-') ch = '_';
    apply_key(cfg, key, args[++i]);
  }

  if (cfg.eps_levels.empty()) cfg.eps_levels = {0.0};
  validate(cfg);
  return cfg;
}

inline int cmd_heatmap(const RunConfig& cfg, std::ostream& out) {
  GridConfig gc;
  gc.problem = cfg.problem;
  gc.half_width = cfg.half_width;
  gc.resolution = cfg.resolution;
  gc.noise_levels = cfg.eps_levels;
  gc.trials = cfg.trials;
  gc.lp = cfg.lp;
  gc.qp = cfg.qp;
  gc.seed = cfg.seed;
  gc.threads = cfg.threads;
  std::vector<GridCell> cells = run_grid(gc);
  const std::string csv = cfg.out + "/heatmap_" + cfg.problem + ".csv";
  emit_heatmap_csv(cells, csv);
  out << "wrote " << csv << "\n";
  TestProblem tp = make_parabola_problem(cfg.problem);
  for (const RegionStats& s :
       success_statistics(cells, cfg.half_width + 1e-12, tp.x_star)) {
    out << "eps=" << format_double(s.eps) << " lp_mean=" << format_double(s.lp_mean)
        << " qp_mean=" << format_double(s.qp_mean) << " cells=" << s.count << "\n";
  }
  if (cfg.png) {
    for (const std::string& f :
         render_heatmap(csv, cfg.out + "/heatmap_" + cfg.problem + ".png",
                        tp.x_star[0], tp.x_star[1]))
      out << "wrote " << f << "\n";
  }
  return 0;
}

inline int cmd_trajectory(const RunConfig& cfg, std::ostream& out) {
  TrajectoryConfig tc;
  tc.problem = cfg.problem;
  tc.mu = cfg.mu;
  tc.eps = cfg.eps_levels.front();
  tc.trials = cfg.trials;
  tc.lp = cfg.lp;
  tc.qp = cfg.qp;
  tc.seed = cfg.seed;
  if (cfg.point.size() == 2) tc.start = cfg.point;
  std::vector<TraceRecord> trace = run_trajectory(tc);
  const std::string csv = cfg.out + "/trajectory_" + cfg.problem + ".csv";
  emit_trajectory_csv(trace, csv);
  out << "wrote " << csv << " (" << trace.size() << " iterates)\n";
  if (!trace.empty()) {
    const TraceRecord& last = trace.back();
    out << "final x=(" << format_double(last.x[0]) << "," << format_double(last.x[1])
        << ") lp_exact=" << format_double(last.lp_exact_fraction)
        << " qp_exact=" << format_double(last.qp_exact_fraction) << "\n";
  }
  return 0;
}

inline int cmd_identify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.point.size() != 2) throw usage_error("identify: requires --x A,B");
  TestProblem tp = make_parabola_problem(cfg.problem);
  const double eps = cfg.eps_levels.front();
  Evaluation ev = evaluate_noisy(tp.oracle, cfg.point, {eps, cfg.seed});

  LpLpecResult lr = identify_lp(ev, cfg.lp);
  QpResult qr = identify_qp(ev, cfg.qp);
  MultiplierPair qp_mult{qr.alpha, qr.beta};

  out << "problem=" << cfg.problem << " eps=" << format_double(eps) << "\n";
  out << "A_lp=" << format_active_set(lr.active_estimate) << "\n";
  out << "A_qp=" << format_active_set(qr.active_estimate) << "\n";
  out << "rho_tilde=" << format_double(lr.rho_tilde) << "\n";
  out << "rho_bar_tilde=" << format_double(lr.rho_bar_tilde) << "\n";
  out << "qp_duality_gap=" << format_double(qr.gap) << "\n";
  out << "psi_lp=" << format_double(psi(ev, lr.multipliers)) << "\n";
  out << "psi_qp=" << format_double(psi(ev, qp_mult)) << "\n";
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  bool all_pass = true;
  for (const CheckResult& r : check::run_all(cfg.quick)) {
    out << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 2;
}

/// Exit codes: 0 success, 1 usage error, 2 solver/verification failure.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out,
                    std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const usage_error& e) {
    err << "error: " << e.what() << "\n\n" << cli_usage();
    return 1;
  }
  try {
    if (cfg.subcommand == "heatmap") return cmd_heatmap(cfg, out);
    if (cfg.subcommand == "trajectory") return cmd_trajectory(cfg, out);
    if (cfg.subcommand == "identify") return cmd_identify(cfg, out);
    return cmd_verify(cfg, out);
  } catch (const usage_error& e) {
    err << "error: " << e.what() << "\n\n" << cli_usage();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace activeset
