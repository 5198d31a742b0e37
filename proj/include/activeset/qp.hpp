// Primal-step identification: the penalized step QP solved through its
// box-constrained dual (projected gradient ascent with Barzilai-Borwein
// steps), an active-set-enumeration oracle for the hard-constrained QP, and
// the reduced KKT direct solve.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "activeset/kkt.hpp"
#include "activeset/linalg.hpp"
#include "activeset/problem.hpp"
#include "activeset/simplex.hpp"

namespace activeset {

struct QpParams {
  double theta = 5.0;
  double nu = 100.0;
  double gap_tol = 1e-8;
  int max_iters = 200000;
  double activity_tol = 1e-8;  // band for the >= 0 rule in the estimate
};

struct QpResult {
  Vec d;            // primal step, length n
  Vec r, s;         // equality slacks, length p
  Vec t;            // inequality slacks, length q
  Vec alpha;        // equality duals, length p
  Vec beta;         // inequality duals, length q
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  bool converged = false;
  ActiveSet active_estimate;
};

namespace qp_detail {

struct DualState {
  Vec alpha, beta;  // box: -nu <= alpha <= nu, 0 <= beta <= nu
};

inline void project(DualState& u, double nu) {
  for (double& a : u.alpha) a = std::clamp(a, -nu, nu);
  for (double& b : u.beta) b = std::clamp(b, 0.0, nu);
}

// w = grad_f + Je alpha + Jc beta
inline Vec stat_vec(const Evaluation& ev, const DualState& u) {
  Vec w = ev.grad_f;
  if (ev.p > 0) {
    Vec t = ev.jac_e.mul(u.alpha);
    for (int i = 0; i < ev.n; ++i) w[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i)];
  }
  if (ev.q > 0) {
    Vec t = ev.jac_c.mul(u.beta);
    for (int i = 0; i < ev.n; ++i) w[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i)];
  }
  return w;
}

inline double dual_value(const Evaluation& ev, const DualState& u, double theta) {
  const Vec w = stat_vec(ev, u);
  double v = -0.5 / theta * dot(w, w);
  if (ev.p > 0) v += dot(ev.e_val, u.alpha);
  if (ev.q > 0) v += dot(ev.c_val, u.beta);
  return v;
}

inline DualState dual_gradient(const Evaluation& ev, const DualState& u, double theta) {
  const Vec w = stat_vec(ev, u);
  DualState g;
  g.alpha = ev.e_val;
  g.beta = ev.c_val;
  if (ev.p > 0) {
    Vec t = ev.jac_e.tmul(w);
    for (int j = 0; j < ev.p; ++j) g.alpha[static_cast<std::size_t>(j)] -= t[static_cast<std::size_t>(j)] / theta;
  }
  if (ev.q > 0) {
    Vec t = ev.jac_c.tmul(w);
    for (int j = 0; j < ev.q; ++j) g.beta[static_cast<std::size_t>(j)] -= t[static_cast<std::size_t>(j)] / theta;
  }
  return g;
}

}  // namespace qp_detail

/// Recovers the primal tuple and objective of the penalized QP from a dual
/// point; the recovered (d, r, s, t) is primal feasible by construction.
inline void recover_primal(const Evaluation& ev, const QpParams& params, QpResult& res) {
  const Vec w = qp_detail::stat_vec(ev, {res.alpha, res.beta});
  res.d.resize(static_cast<std::size_t>(ev.n));
  for (int i = 0; i < ev.n; ++i)
    res.d[static_cast<std::size_t>(i)] = -w[static_cast<std::size_t>(i)] / params.theta;

  res.r.assign(static_cast<std::size_t>(ev.p), 0.0);
  res.s.assign(static_cast<std::size_t>(ev.p), 0.0);
  res.t.assign(static_cast<std::size_t>(ev.q), 0.0);
  double slack_sum = 0.0;
  if (ev.p > 0) {
    Vec lin = ev.jac_e.tmul(res.d);
    for (int j = 0; j < ev.p; ++j) {
      const double v = ev.e_val[static_cast<std::size_t>(j)] + lin[static_cast<std::size_t>(j)];
      res.r[static_cast<std::size_t>(j)] = std::max(v, 0.0);
      res.s[static_cast<std::size_t>(j)] = std::max(-v, 0.0);
      slack_sum += std::fabs(v);
    }
  }
  if (ev.q > 0) {
    Vec lin = ev.jac_c.tmul(res.d);
    for (int j = 0; j < ev.q; ++j) {
      const double v = ev.c_val[static_cast<std::size_t>(j)] + lin[static_cast<std::size_t>(j)];
      res.t[static_cast<std::size_t>(j)] = std::max(v, 0.0);
      slack_sum += std::max(v, 0.0);
    }
  }
  res.primal_obj = dot(ev.grad_f, res.d) + params.nu * slack_sum +
                   0.5 * params.theta * dot(res.d, res.d);
}

struct ReducedKktSolution;
inline ReducedKktSolution solve_reduced_kkt(const Evaluation& ev, const ActiveSet& active,
                                            double theta);

namespace qp_detail {

/// Tries to close the duality gap exactly: guess the active set from the
/// current primal step (and the dual point), solve the reduced KKT system,
/// and accept the resulting dual point when it lies in the box and lowers
/// the gap.  This is exact whenever the hard-constrained solution's
/// multipliers fit inside the nu-box.
bool try_polish(const Evaluation& ev, const QpParams& params, QpResult& res);

}  // namespace qp_detail

/// Maximizes the box-constrained dual by projected gradient ascent with BB
/// steps and a monotone safeguard; stops when the recovered primal-dual gap
/// is at or below params.gap_tol, with a reduced-KKT polish attempt when
/// gradient ascent alone stalls.  A result with converged == false carries
/// the achieved gap.
inline QpResult solve_penalized_qp(const Evaluation& ev, const QpParams& params) {
  require(params.theta > 0.0 && params.nu > 0.0, "solve_penalized_qp: theta, nu must be positive");
  using namespace qp_detail;

  DualState u{Vec(static_cast<std::size_t>(ev.p), 0.0), Vec(static_cast<std::size_t>(ev.q), 0.0)};
  // Lipschitz fallback step from a Frobenius bound on [Je Jc]
  double fro2 = 0.0;
  for (double v : ev.jac_e.data()) fro2 += v * v;
  for (double v : ev.jac_c.data()) fro2 += v * v;
  const double step0 = (fro2 > 0.0) ? params.theta / fro2 : 1.0;

  double qval = dual_value(ev, u, params.theta);
  DualState grad = dual_gradient(ev, u, params.theta);
  double step = step0;
  DualState prev_u = u;
  DualState prev_grad = grad;
  bool have_prev = false;

  QpResult res;
  res.alpha = u.alpha;
  res.beta = u.beta;
  recover_primal(ev, params, res);
  res.dual_obj = qval;
  res.gap = res.primal_obj - res.dual_obj;
  if (res.gap <= params.gap_tol) {
    res.converged = true;
    res.active_estimate = {};
    return res;
  }

  for (int it = 0; it < params.max_iters; ++it) {
    if (have_prev) {
      // BB1 step: s^T s / (-s^T y), concave objective
      double ss = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < u.alpha.size(); ++j) {
        const double sj = u.alpha[j] - prev_u.alpha[j];
        ss += sj * sj;
        sy += sj * (grad.alpha[j] - prev_grad.alpha[j]);
      }
      for (std::size_t j = 0; j < u.beta.size(); ++j) {
        const double sj = u.beta[j] - prev_u.beta[j];
        ss += sj * sj;
        sy += sj * (grad.beta[j] - prev_grad.beta[j]);
      }
      step = (sy < -1e-300) ? ss / (-sy) : step0;
      step = std::clamp(step, 1e-12 * step0, 1e12 * step0);
    }

    // monotone safeguard: halve until the dual value does not decrease
    DualState trial;
    double trial_val = -kInf;
    double st = step;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u;
      for (std::size_t j = 0; j < u.alpha.size(); ++j) trial.alpha[j] += st * grad.alpha[j];
      for (std::size_t j = 0; j < u.beta.size(); ++j) trial.beta[j] += st * grad.beta[j];
      project(trial, params.nu);
      trial_val = dual_value(ev, trial, params.theta);
      if (trial_val >= qval - 1e-16 * (1.0 + std::fabs(qval))) break;
      st *= 0.5;
    }

    prev_u = u;
    prev_grad = grad;
    u = trial;
    qval = trial_val;
    grad = dual_gradient(ev, u, params.theta);
    have_prev = true;

    if ((it & 7) == 0 || it + 1 == params.max_iters) {
      res.alpha = u.alpha;
      res.beta = u.beta;
      recover_primal(ev, params, res);
      res.dual_obj = qval;
      res.gap = res.primal_obj - res.dual_obj;
      if (res.gap <= params.gap_tol) {
        res.converged = true;
        return res;
      }
      if ((it & 2047) == 2040 && qp_detail::try_polish(ev, params, res)) {
        res.converged = true;
        return res;
      }
    }
  }
  res.alpha = u.alpha;
  res.beta = u.beta;
  recover_primal(ev, params, res);
  res.dual_obj = qval;
  res.gap = res.primal_obj - res.dual_obj;
  res.converged = res.gap <= params.gap_tol;
  if (!res.converged && qp_detail::try_polish(ev, params, res)) res.converged = true;
  return res;
}

struct qp_infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact solve of the hard-constrained step QP by enumerating active subsets
/// of the inequality constraints and solving each equality-constrained KKT
/// system.  Feasibility of the constraint system is checked first by an LP
/// phase; an infeasible system throws qp_infeasible_error.
inline Vec enumerate_qp_oracle(const Evaluation& ev, double theta) {
  require(theta > 0.0, "enumerate_qp_oracle: theta must be positive");
  const int n = ev.n, p = ev.p, q = ev.q;
  if (q > 12) throw enumeration_limit_error("enumerate_qp_oracle: q > 12");

  // feasibility phase: does d exist with e + Je^T d = 0, c + Jc^T d <= 0?
  {
    // vars: d(n) free, r,s(p) >= 0, t(q) >= 0, u(q) >= 0
    StandardLp lp;
    lp.num_vars = n + 2 * p + 2 * q;
    lp.num_rows = p + q;
    lp.objective.assign(static_cast<std::size_t>(lp.num_vars), 0.0);
    lp.lower.assign(static_cast<std::size_t>(lp.num_vars), 0.0);
    lp.upper.assign(static_cast<std::size_t>(lp.num_vars), kInf);
    for (int j = 0; j < n; ++j) lp.lower[static_cast<std::size_t>(j)] = -kInf;
    lp.eq = Matrix(static_cast<std::size_t>(lp.num_rows), static_cast<std::size_t>(lp.num_vars));
    lp.rhs.resize(static_cast<std::size_t>(lp.num_rows));
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < n; ++j)
        lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            ev.jac_e(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
      lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(n + i)) = -1.0;
      lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(n + p + i)) = 1.0;
      lp.objective[static_cast<std::size_t>(n + i)] = 1.0;
      lp.objective[static_cast<std::size_t>(n + p + i)] = 1.0;
      lp.rhs[static_cast<std::size_t>(i)] = -ev.e_val[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < n; ++j)
        lp.eq(static_cast<std::size_t>(p + i), static_cast<std::size_t>(j)) =
            ev.jac_c(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
      lp.eq(static_cast<std::size_t>(p + i), static_cast<std::size_t>(n + 2 * p + i)) = -1.0;    // t (violation)
      lp.eq(static_cast<std::size_t>(p + i), static_cast<std::size_t>(n + 2 * p + q + i)) = 1.0; // slack
      lp.objective[static_cast<std::size_t>(n + 2 * p + i)] = 1.0;
      lp.rhs[static_cast<std::size_t>(p + i)] = -ev.c_val[static_cast<std::size_t>(i)];
    }
    LpSolution fs = simplex_solve(lp);
    if (fs.status != LpStatus::Optimal || fs.objective > 1e-8)
      throw qp_infeasible_error("enumerate_qp_oracle: linearized constraints infeasible");
  }

  for (std::size_t mask = 0; mask < (std::size_t{1} << q); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < q; ++i)
      if (mask & (std::size_t{1} << i)) act.push_back(i);
    const int l = static_cast<int>(act.size());
    const int m = n + p + l;

    Matrix k(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    Vec rhs(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) {
      k(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = theta;
      rhs[static_cast<std::size_t>(i)] = -ev.grad_f[static_cast<std::size_t>(i)];
      for (int j = 0; j < p; ++j) {
        k(static_cast<std::size_t>(i), static_cast<std::size_t>(n + j)) = ev.jac_e(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        k(static_cast<std::size_t>(n + j), static_cast<std::size_t>(i)) = ev.jac_e(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
      for (int j = 0; j < l; ++j) {
        k(static_cast<std::size_t>(i), static_cast<std::size_t>(n + p + j)) = ev.jac_c(static_cast<std::size_t>(i), static_cast<std::size_t>(act[static_cast<std::size_t>(j)]));
        k(static_cast<std::size_t>(n + p + j), static_cast<std::size_t>(i)) = ev.jac_c(static_cast<std::size_t>(i), static_cast<std::size_t>(act[static_cast<std::size_t>(j)]));
      }
    }
    for (int j = 0; j < p; ++j) rhs[static_cast<std::size_t>(n + j)] = -ev.e_val[static_cast<std::size_t>(j)];
    for (int j = 0; j < l; ++j) rhs[static_cast<std::size_t>(n + p + j)] = -ev.c_val[static_cast<std::size_t>(act[static_cast<std::size_t>(j)])];

    auto f = lu_factor(k);
    if (f.singular) continue;
    Vec sol = lu_solve(f, rhs);
    Vec d(sol.begin(), sol.begin() + n);

    bool ok = true;
    for (int j = 0; j < l && ok; ++j)
      if (sol[static_cast<std::size_t>(n + p + j)] < -1e-10) ok = false;
    if (ok && q > 0) {
      Vec lin = ev.jac_c.tmul(d);
      for (int i = 0; i < q && ok; ++i) {
        if (mask & (std::size_t{1} << i)) continue;
        if (ev.c_val[static_cast<std::size_t>(i)] + lin[static_cast<std::size_t>(i)] > 1e-9) ok = false;
      }
    }
    if (ok) return d;
  }
  throw std::runtime_error("enumerate_qp_oracle: no KKT-consistent active subset found");
}

struct ReducedKktSolution {
  Vec d;
  Vec alpha;
  Vec beta_active;
  bool inactive_strict = false;  // c_i + grad c_i^T d < 0 off the active set
  bool beta_positive = false;    // beta > 0 on the active set
};

/// Direct LU solve of the reduced KKT system for a fixed active set.
inline ReducedKktSolution solve_reduced_kkt(const Evaluation& ev, const ActiveSet& active,
                                            double theta) {
  require(theta > 0.0, "solve_reduced_kkt: theta must be positive");
  const int n = ev.n, p = ev.p;
  const int l = static_cast<int>(active.size());
  const int m = n + p + l;
  Matrix k(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  Vec rhs(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    k(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = theta;
    rhs[static_cast<std::size_t>(i)] = -ev.grad_f[static_cast<std::size_t>(i)];
    for (int j = 0; j < p; ++j) {
      k(static_cast<std::size_t>(i), static_cast<std::size_t>(n + j)) = ev.jac_e(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      k(static_cast<std::size_t>(n + j), static_cast<std::size_t>(i)) = ev.jac_e(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    for (int j = 0; j < l; ++j) {
      const int ci = active[static_cast<std::size_t>(j)] - 1;
      k(static_cast<std::size_t>(i), static_cast<std::size_t>(n + p + j)) = ev.jac_c(static_cast<std::size_t>(i), static_cast<std::size_t>(ci));
      k(static_cast<std::size_t>(n + p + j), static_cast<std::size_t>(i)) = ev.jac_c(static_cast<std::size_t>(i), static_cast<std::size_t>(ci));
    }
  }
  for (int j = 0; j < p; ++j) rhs[static_cast<std::size_t>(n + j)] = -ev.e_val[static_cast<std::size_t>(j)];
  for (int j = 0; j < l; ++j)
    rhs[static_cast<std::size_t>(n + p + j)] = -ev.c_val[static_cast<std::size_t>(active[static_cast<std::size_t>(j)] - 1)];

  auto f = lu_factor(k);
  if (f.singular)
    throw singular_matrix_error("solve_reduced_kkt: rank-deficient active Jacobian");
  Vec sol = lu_solve(f, rhs);

  ReducedKktSolution out;
  out.d.assign(sol.begin(), sol.begin() + n);
  out.alpha.assign(sol.begin() + n, sol.begin() + n + p);
  out.beta_active.assign(sol.begin() + n + p, sol.end());
  out.beta_positive = true;
  for (double b : out.beta_active)
    if (!(b > 0.0)) out.beta_positive = false;
  out.inactive_strict = true;
  if (ev.q > 0) {
    Vec lin = ev.jac_c.tmul(out.d);
    for (int i = 0; i < ev.q; ++i) {
      const int idx1 = i + 1;
      if (std::find(active.begin(), active.end(), idx1) != active.end()) continue;
      if (!(ev.c_val[static_cast<std::size_t>(i)] + lin[static_cast<std::size_t>(i)] < 0.0))
        out.inactive_strict = false;
    }
  }
  return out;
}

namespace qp_detail {

inline bool try_polish(const Evaluation& ev, const QpParams& params, QpResult& res) {
  // candidate active sets from the primal linearization at several bands,
  // plus one from the dual point
  std::vector<ActiveSet> candidates;
  if (ev.q > 0 && !res.d.empty()) {
    Vec lin = ev.jac_c.tmul(res.d);
    for (double tol : {1e-8, 1e-6, 1e-4}) {
      ActiveSet a;
      for (int i = 0; i < ev.q; ++i)
        if (ev.c_val[static_cast<std::size_t>(i)] + lin[static_cast<std::size_t>(i)] >= -tol)
          a.push_back(i + 1);
      candidates.push_back(std::move(a));
    }
  }
  {
    ActiveSet a;
    for (int i = 0; i < ev.q; ++i)
      if (res.beta[static_cast<std::size_t>(i)] > 1e-8 * (1.0 + norm_inf(res.beta)))
        a.push_back(i + 1);
    candidates.push_back(std::move(a));
  }

  bool improved = false;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const ActiveSet& a = candidates[k];
    bool dup = false;
    for (std::size_t j = 0; j < k; ++j)
      if (candidates[j] == a) dup = true;
    if (dup) continue;
    try {
      ReducedKktSolution rk = solve_reduced_kkt(ev, a, params.theta);
      DualState u{rk.alpha, Vec(static_cast<std::size_t>(ev.q), 0.0)};
      bool in_box = true;
      for (double al : u.alpha)
        if (std::fabs(al) > params.nu) in_box = false;
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double b = rk.beta_active[j];
        if (b < -1e-10 || b > params.nu) in_box = false;
        u.beta[static_cast<std::size_t>(a[j] - 1)] = std::max(b, 0.0);
      }
      if (!in_box) continue;
      QpResult trial;
      trial.alpha = u.alpha;
      trial.beta = u.beta;
      recover_primal(ev, params, trial);
      trial.dual_obj = dual_value(ev, u, params.theta);
      trial.gap = trial.primal_obj - trial.dual_obj;
      if (trial.gap < res.gap) {
        trial.active_estimate = res.active_estimate;
        res = trial;
        improved = true;
      }
    } catch (const singular_matrix_error&) {
      continue;
    }
  }
  return improved && res.gap <= params.gap_tol;
}

}  // namespace qp_detail

/// Runs the penalized QP and applies the linearized-activity threshold rule.
inline QpResult identify_qp(const Evaluation& ev, const QpParams& params) {
  QpResult res = solve_penalized_qp(ev, params);
  res.active_estimate.clear();
  if (ev.q > 0) {
    Vec lin = ev.jac_c.tmul(res.d);
    for (int i = 0; i < ev.q; ++i)
      if (ev.c_val[static_cast<std::size_t>(i)] + lin[static_cast<std::size_t>(i)] >= -params.activity_tol)
        res.active_estimate.push_back(i + 1);
  }
  return res;
}

}  // namespace activeset
