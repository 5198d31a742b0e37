// Experiment drivers: grid/heatmap success-fraction maps around the
// minimizer, and a quadratic-penalty descent whose iterate trace feeds both
// identifiers.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "activeset/kkt.hpp"
#include "activeset/lp_identify.hpp"
#include "activeset/problem.hpp"
#include "activeset/qp.hpp"

namespace activeset {

struct GridConfig {
  std::string problem = "f1";
  Vec center;                 // empty -> x_star
  double half_width = 0.4;    // per axis
  int resolution = 81;        // points per axis
  std::vector<double> noise_levels = {0.0};
  int trials = 8;             // per noisy level; 1 forced when eps = 0
  LpLpecParams lp;
  QpParams qp;
  std::uint64_t seed = 0;
  int threads = 0;            // 0 -> ACTIVESET_ID_THREADS or hardware count
};

/// One grid point at one noise level, with per-method success fractions.
struct GridCell {
  double x1 = 0.0, x2 = 0.0;
  double eps = 0.0;
  double lp_fraction = 0.0;
  double qp_fraction = 0.0;
};

struct TrajectoryConfig {
  std::string problem = "f1";
  double mu = 100.0;          // quadratic penalty parameter
  double grad_tol = 1e-6;
  int max_iters = 20000;
  double eps = 0.0;           // identification noise level; 0 -> exact
  int trials = 10;            // noisy identification trials per iterate
  Vec start;                  // empty -> per-problem default
  LpLpecParams lp;
  QpParams qp;
  std::uint64_t seed = 0;
};

/// Per-iterate identification quality: mean |estimate & a_star| and the
/// fraction of trials with an exact match, per method.
struct TraceRecord {
  int iter = 0;
  Vec x;
  double lp_correct_mean = 0.0;
  double qp_correct_mean = 0.0;
  double lp_exact_fraction = 0.0;
  double qp_exact_fraction = 0.0;
};

namespace detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ACTIVESET_ID_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline int intersection_size(const ActiveSet& a, const ActiveSet& b) {
  int cnt = 0;
  for (int v : a)
    if (std::find(b.begin(), b.end(), v) != b.end()) ++cnt;
  return cnt;
}

}  // namespace detail

/// Runs both identifiers over the grid; per-cell seeds derive from
/// (master seed, noise-level index, cell index, trial index), so results are
/// deterministic regardless of thread count.  Cells are ordered noise-level
/// major, then row-major over the grid.
inline std::vector<GridCell> run_grid(const GridConfig& cfg) {
  require(cfg.resolution >= 2, "run_grid: resolution must be >= 2");
  require(cfg.half_width > 0.0, "run_grid: half-width must be positive");
  require(cfg.trials >= 1, "run_grid: trials must be >= 1");
  TestProblem tp = make_parabola_problem(cfg.problem);
  if (tp.a_star.empty()) throw std::invalid_argument("run_grid: problem has no a_star fixture");
  const Vec center = cfg.center.empty() ? tp.x_star : cfg.center;
  require(center.size() == 2, "run_grid: center must be 2-D");

  const int res = cfg.resolution;
  const int cells_per_level = res * res;
  std::vector<GridCell> cells(cfg.noise_levels.size() * static_cast<std::size_t>(cells_per_level));

  auto eval_cell = [&](std::size_t lvl, int cell_index) {
    const double eps = cfg.noise_levels[lvl];
    const int gi = cell_index / res;   // x1 index
    const int gj = cell_index % res;   // x2 index
    Vec x{center[0] - cfg.half_width + 2.0 * cfg.half_width * gi / (res - 1),
          center[1] - cfg.half_width + 2.0 * cfg.half_width * gj / (res - 1)};
    const int trials = (eps == 0.0) ? 1 : cfg.trials;
    int lp_hits = 0, qp_hits = 0;
    for (int t = 0; t < trials; ++t) {
      NoiseSpec spec{eps, derive_seed(cfg.seed, lvl, static_cast<std::uint64_t>(cell_index),
                                      static_cast<std::uint64_t>(t))};
      Evaluation ev = evaluate_noisy(tp.oracle, x, spec);
      if (identify_lp(ev, cfg.lp).active_estimate == tp.a_star) ++lp_hits;
      if (identify_qp(ev, cfg.qp).active_estimate == tp.a_star) ++qp_hits;
    }
    GridCell& c = cells[lvl * static_cast<std::size_t>(cells_per_level) + static_cast<std::size_t>(cell_index)];
    c.x1 = x[0];
    c.x2 = x[1];
    c.eps = eps;
    c.lp_fraction = static_cast<double>(lp_hits) / trials;
    c.qp_fraction = static_cast<double>(qp_hits) / trials;
  };

  const int nthreads = detail::resolve_threads(cfg.threads);
  const std::size_t total = cells.size();
  if (nthreads <= 1 || total < 64) {
    for (std::size_t lvl = 0; lvl < cfg.noise_levels.size(); ++lvl)
      for (int ci = 0; ci < cells_per_level; ++ci) eval_cell(lvl, ci);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int w = 0; w < nthreads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = static_cast<std::size_t>(w); k < total; k += static_cast<std::size_t>(nthreads))
          eval_cell(k / static_cast<std::size_t>(cells_per_level),
                    static_cast<int>(k % static_cast<std::size_t>(cells_per_level)));
      });
    }
    for (auto& th : pool) th.join();
  }
  return cells;
}

/// Penalty descent with Armijo backtracking on exact gradients; at each
/// iterate both identifiers run on exact or freshly sampled noisy values.
inline std::vector<TraceRecord> run_trajectory(const TrajectoryConfig& cfg) {
  require(cfg.mu > 0.0, "run_trajectory: mu must be positive");
  require(cfg.grad_tol > 0.0, "run_trajectory: gradient tolerance must be positive");
  TestProblem tp = make_parabola_problem(cfg.problem);
  Vec x = cfg.start.empty() ? Vec{0.4, 0.3} : cfg.start;
  require(x.size() == 2, "run_trajectory: start must be 2-D");

  std::vector<TraceRecord> trace;
  const int a_star_size = static_cast<int>(tp.a_star.size());
  (void)a_star_size;

  for (int k = 0; k < cfg.max_iters; ++k) {
    TraceRecord rec;
    rec.iter = k;
    rec.x = x;
    const int trials = (cfg.eps == 0.0) ? 1 : cfg.trials;
    double lp_sum = 0.0, qp_sum = 0.0;
    int lp_exact = 0, qp_exact = 0;
    for (int t = 0; t < trials; ++t) {
      NoiseSpec spec{cfg.eps, derive_seed(cfg.seed, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(t), 0x7261ULL)};
      Evaluation ev = evaluate_noisy(tp.oracle, x, spec);
      const ActiveSet lp_est = identify_lp(ev, cfg.lp).active_estimate;
      const ActiveSet qp_est = identify_qp(ev, cfg.qp).active_estimate;
      lp_sum += detail::intersection_size(lp_est, tp.a_star);
      qp_sum += detail::intersection_size(qp_est, tp.a_star);
      if (lp_est == tp.a_star) ++lp_exact;
      if (qp_est == tp.a_star) ++qp_exact;
    }
    rec.lp_correct_mean = lp_sum / trials;
    rec.qp_correct_mean = qp_sum / trials;
    rec.lp_exact_fraction = static_cast<double>(lp_exact) / trials;
    rec.qp_exact_fraction = static_cast<double>(qp_exact) / trials;
    trace.push_back(std::move(rec));

    auto [val, grad] = penalty_objective(tp.oracle, x, cfg.mu);
    if (val > 1e12) throw std::runtime_error("run_trajectory: penalty objective diverged");
    if (norm_inf(grad) <= cfg.grad_tol) break;
    double step = 1.0;
    const double slope = dot(grad, grad);
    while (step > 1e-16) {
      Vec xt(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] - step * grad[i];
      if (penalty_objective(tp.oracle, xt, cfg.mu).first <= val - 1e-4 * step * slope) {
        x = std::move(xt);
        break;
      }
      step *= 0.5;
    }
  }
  return trace;
}

struct RegionStats {
  double eps = 0.0;
  double lp_mean = 0.0;
  double qp_mean = 0.0;
  int count = 0;
};

/// Mean success fraction over cells within inf-norm radius of center,
/// per method and noise level (ordered as in the input).
inline std::vector<RegionStats> success_statistics(const std::vector<GridCell>& cells,
                                                   double radius, const Vec& center) {
  require(radius > 0.0, "success_statistics: radius must be positive");
  require(center.size() == 2, "success_statistics: center must be 2-D");
  std::vector<RegionStats> stats;
  for (const GridCell& c : cells) {
    if (std::max(std::fabs(c.x1 - center[0]), std::fabs(c.x2 - center[1])) > radius) continue;
    auto it = std::find_if(stats.begin(), stats.end(),
                           [&](const RegionStats& s) { return s.eps == c.eps; });
    if (it == stats.end()) {
      stats.push_back(RegionStats{c.eps, 0.0, 0.0, 0});
      it = stats.end() - 1;
    }
    it->lp_mean += c.lp_fraction;
    it->qp_mean += c.qp_fraction;
    it->count += 1;
  }
  if (stats.empty()) throw std::runtime_error("success_statistics: no cells in region");
  for (RegionStats& s : stats) {
    s.lp_mean /= s.count;
    s.qp_mean /= s.count;
  }
  return stats;
}

}  // namespace activeset
