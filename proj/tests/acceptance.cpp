// End-to-end acceptance suite: one pass/fail line per criterion, nonzero exit
// if any criterion fails.  Tolerances are pinned here and must not be loosened
// to accommodate implementation changes.
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "activeset/experiments.hpp"
#include "activeset/kkt.hpp"
#include "activeset/lp_identify.hpp"
#include "activeset/problem.hpp"
#include "activeset/qp.hpp"
#include "activeset/report.hpp"
#include "activeset/selfcheck.hpp"

using namespace activeset;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion-%02d %s: %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

constexpr std::uint64_t kSeed = 20260823ULL;

struct ProblemRun {
  TestProblem tp;
  std::vector<GridCell> cells;
  std::string grid_csv;
  std::vector<TraceRecord> exact_trace, noisy_trace;
  std::string exact_csv, noisy_csv;
};

GridConfig grid_config(const std::string& problem) {
  GridConfig gc;
  gc.problem = problem;
  gc.half_width = 0.4;
  gc.resolution = 81;
  gc.noise_levels = {0.0, 1e-2, 1e-1};
  gc.trials = 8;
  gc.seed = kSeed;
  return gc;
}

TrajectoryConfig trajectory_config(const std::string& problem, double eps) {
  TrajectoryConfig tc;
  tc.problem = problem;
  tc.eps = eps;
  tc.trials = 10;
  tc.seed = kSeed;
  return tc;
}

ProblemRun run_problem(const std::string& problem) {
  ProblemRun r;
  r.tp = make_parabola_problem(problem);
  r.cells = run_grid(grid_config(problem));
  r.grid_csv = heatmap_csv_text(r.cells);
  r.exact_trace = run_trajectory(trajectory_config(problem, 0.0));
  r.exact_csv = trajectory_csv_text(r.exact_trace);
  r.noisy_trace = run_trajectory(trajectory_config(problem, 1e-2));
  r.noisy_csv = trajectory_csv_text(r.noisy_trace);
  return r;
}

bool near_star(const GridCell& c, const Vec& xs, double radius) {
  return std::max(std::fabs(c.x1 - xs[0]), std::fabs(c.x2 - xs[1])) <= radius + 1e-12;
}

}  // namespace

int main() {
  std::map<std::string, ProblemRun> runs;
  for (const char* name : {"f1", "f2"}) runs[name] = run_problem(name);

  // 1. Exact identification near the minimizer on the 81x81 grid.
  {
    bool pass = true;
    std::ostringstream detail;
    int counted = 0;
    for (auto& [name, r] : runs) {
      for (const GridCell& c : r.cells) {
        if (c.eps != 0.0 || !near_star(c, r.tp.x_star, 0.05)) continue;
        ++counted;
        if (c.lp_fraction != 1.0 || c.qp_fraction != 1.0) {
          pass = false;
          detail << name << " fails at (" << c.x1 << "," << c.x2 << ") lp=" << c.lp_fraction
                 << " qp=" << c.qp_fraction << "; ";
        }
      }
    }
    if (pass) detail << "both methods exact on all " << counted << " cells within 0.05 of x*";
    report(1, pass, detail.str());
  }

  // 2. Noise-robustness ordering of region means, and >= 0.9 at eps = 1e-2.
  {
    bool pass = true;
    std::ostringstream detail;
    for (auto& [name, r] : runs) {
      auto stats = success_statistics(r.cells, 0.05 + 1e-12, r.tp.x_star);
      std::map<double, RegionStats> by_eps;
      for (const RegionStats& s : stats) by_eps[s.eps] = s;
      const RegionStats& s0 = by_eps.at(0.0);
      const RegionStats& s2 = by_eps.at(1e-2);
      const RegionStats& s1 = by_eps.at(1e-1);
      const bool order = s0.lp_mean >= s2.lp_mean && s2.lp_mean >= s1.lp_mean &&
                         s0.qp_mean >= s2.qp_mean && s2.qp_mean >= s1.qp_mean;
      const bool strong = s2.lp_mean >= 0.9 || s2.qp_mean >= 0.9;
      if (!order || !strong) pass = false;
      detail << name << " lp(" << s0.lp_mean << "," << s2.lp_mean << "," << s1.lp_mean
             << ") qp(" << s0.qp_mean << "," << s2.qp_mean << "," << s1.qp_mean << ") ";
    }
    report(2, pass, detail.str());
  }

  // 3. Exact sandwich M^-1 rho <= omega <= M rho_bar on 50 f1 points.
  {
    const TestProblem& tp = runs["f1"].tp;
    LpLpecParams params;  // M = 1e8
    bool pass = true;
    int n_points = 0;
    std::ostringstream detail;
    SplitMix64 g(kSeed + 3);
    while (n_points < 50) {
      Vec x{tp.x_star[0] + g.symmetric(0.05), tp.x_star[1] + g.symmetric(0.05)};
      Evaluation ev = evaluate_exact(tp.oracle, x);
      LpLpecResult res = identify_lp(ev, params);
      OmegaResult om = omega_bruteforce(ev, params.M);
      if (res.rho_tilde / params.M > om.value + 1e-7 ||
          om.value > params.M * res.rho_bar_tilde + 1e-7) {
        pass = false;
        detail << "violated at (" << x[0] << "," << x[1] << "); ";
      }
      ++n_points;
    }
    if (pass) detail << "sandwich holds at 50 sampled points within 0.05 of x*";
    report(3, pass, detail.str());
  }

  // 4. rho_bar <= rho + sqrt(q) sqrt(rho) on 1000 random instances.
  {
    CheckResult r = check::lemma_rho_bar_vs_rho(1000, kSeed + 4);
    report(4, r.pass, r.detail);
  }

  // 5. Two-sided multiplier bound, Mbar = 10, entrywise noise 1e-3.
  {
    CheckResult r = check::lemma_two_sided_bound(200, kSeed + 5, 10.0, 1e-3);
    report(5, r.pass, r.detail);
  }

  // 6. Penalized-QP step matches the enumeration oracle, nu = 1e4.
  {
    CheckResult r = check::qp_against_oracle(500, kSeed + 6);
    report(6, r.pass, r.detail);
  }

  // 7. Reduced KKT fixtures and Jacobian-perturbation robustness.
  {
    bool pass = true;
    std::ostringstream detail;
    for (auto& [name, r] : runs) {
      Evaluation ev = evaluate_exact(r.tp.oracle, r.tp.x_star);
      try {
        ReducedKktSolution rk = solve_reduced_kkt(ev, r.tp.a_star, 5.0);
        if (norm_inf(rk.d) > 1e-8 || !rk.beta_positive || !rk.inactive_strict) {
          pass = false;
          detail << name << " fixture conditions fail; ";
        }
        for (int sign : {-1, 1}) {
          Evaluation pert = ev;
          for (double& v : pert.jac_c.data()) v += sign * 1e-4;
          ReducedKktSolution pk = solve_reduced_kkt(pert, r.tp.a_star, 5.0);
          if (!pk.beta_positive) {
            pass = false;
            detail << name << " perturbed multipliers lose positivity; ";
          }
        }
      } catch (const std::exception& e) {
        pass = false;
        detail << name << ": " << e.what() << "; ";
      }
    }
    if (pass) detail << "d = 0, beta > 0, strict inactivity at both fixtures; stable under 1e-4 Jacobian shifts";
    report(7, pass, detail.str());
  }

  // 8. Simplex vs vertex enumeration with reduced-cost certification.
  {
    CheckResult r = check::simplex_against_vertices(200, kSeed + 8);
    report(8, r.pass, r.detail);
  }

  // 9. Perturbed-linear-system bound on 200 conforming instances.
  {
    CheckResult r = check::perturbation_bound(200, kSeed + 9);
    report(9, r.pass, r.detail);
  }

  // 10. Trajectory behavior, exact and noisy.
  {
    bool pass = true;
    std::ostringstream detail;
    for (auto& [name, r] : runs) {
      const TraceRecord& last = r.exact_trace.back();
      auto [val, grad] = penalty_objective(r.tp.oracle, last.x, 100.0);
      (void)val;
      if (norm_inf(grad) > 1e-6) {
        pass = false;
        detail << name << " exact run did not reach gradient tolerance; ";
      }
      for (const TraceRecord& rec : r.exact_trace) {
        const double dist = std::max(std::fabs(rec.x[0] - r.tp.x_star[0]),
                                     std::fabs(rec.x[1] - r.tp.x_star[1]));
        if (dist <= 0.02 && (rec.lp_exact_fraction != 1.0 || rec.qp_exact_fraction != 1.0)) {
          pass = false;
          detail << name << " misidentified at iterate " << rec.iter << " within 0.02; ";
        }
      }
      const TraceRecord& nf = r.noisy_trace.front();
      const TraceRecord& nl = r.noisy_trace.back();
      if (nl.lp_correct_mean < nf.lp_correct_mean || nl.qp_correct_mean < nf.qp_correct_mean) {
        pass = false;
        detail << name << " noisy correct-count did not improve; ";
      }
    }
    if (pass) detail << "exact runs converge and identify within 0.02; noisy final >= first correct-count";
    report(10, pass, detail.str());
  }

  // 11. Determinism: byte-identical CSVs on re-run with the same seeds.
  {
    bool pass = true;
    std::ostringstream detail;
    for (auto& [name, r] : runs) {
      const std::string grid2 = heatmap_csv_text(run_grid(grid_config(name)));
      const std::string exact2 = trajectory_csv_text(run_trajectory(trajectory_config(name, 0.0)));
      const std::string noisy2 = trajectory_csv_text(run_trajectory(trajectory_config(name, 1e-2)));
      if (grid2 != r.grid_csv) {
        pass = false;
        detail << name << " grid CSV differs; ";
      }
      if (exact2 != r.exact_csv || noisy2 != r.noisy_csv) {
        pass = false;
        detail << name << " trajectory CSV differs; ";
      }
    }
    if (pass) detail << "grid and trajectory CSVs byte-identical across re-runs";
    report(11, pass, detail.str());
  }

  std::printf("%s (%d criteria failed)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
