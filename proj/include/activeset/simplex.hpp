// Self-contained bounded-variable primal simplex with Bland's rule.
// Two phases; the basis is refactorized every iteration (desk scale).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "activeset/linalg.hpp"

namespace activeset {

struct StandardLp {
  int num_vars = 0;
  int num_rows = 0;
  Vec objective;  // length num_vars
  Matrix eq;      // num_rows x num_vars
  Vec rhs;        // length num_rows
  Vec lower;      // -inf allowed (free variables)
  Vec upper;      // +inf allowed
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    default: return "iteration-limit";
  }
}

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  Vec x;
  double objective = 0.0;
  // diagnostics for optimality certification
  Vec reduced_costs;            // structural variables only
  std::vector<int> var_state;   // 0 basic, 1 at lower, 2 at upper, 3 free nonbasic
};

namespace simplex_detail {

constexpr int kBasic = 0, kAtLower = 1, kAtUpper = 2, kFreeNb = 3;
constexpr double kTol = 1e-9;

struct Tableau {
  int total = 0, m = 0;
  Matrix a;        // m x total
  Vec rhs, lower, upper, value;
  std::vector<int> state;
  std::vector<int> basis;  // length m

  Vec col(int j) const { return a.col(static_cast<std::size_t>(j)); }
};

// Recomputes basic values from scratch: x_B = B^-1 (rhs - A_N x_N).
inline bool recompute_basics(Tableau& t) {
  Matrix b(static_cast<std::size_t>(t.m), static_cast<std::size_t>(t.m));
  for (int i = 0; i < t.m; ++i)
    for (int r = 0; r < t.m; ++r)
      b(static_cast<std::size_t>(r), static_cast<std::size_t>(i)) =
          t.a(static_cast<std::size_t>(r), static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)]));
  auto f = lu_factor(b);
  if (f.singular) return false;
  Vec r = t.rhs;
  for (int j = 0; j < t.total; ++j) {
    if (t.state[static_cast<std::size_t>(j)] == kBasic) continue;
    const double xj = t.value[static_cast<std::size_t>(j)];
    if (xj == 0.0) continue;
    for (int i = 0; i < t.m; ++i)
      r[static_cast<std::size_t>(i)] -= t.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * xj;
  }
  Vec xb = lu_solve(f, r);
  for (int i = 0; i < t.m; ++i)
    t.value[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)])] = xb[static_cast<std::size_t>(i)];
  return true;
}

// Runs simplex iterations on the tableau for the given cost vector.
// Returns Optimal / Unbounded / IterationLimit; fills reduced costs.
inline LpStatus iterate(Tableau& t, const Vec& cost, int max_iters, Vec* red_out) {
  for (int iter = 0; iter < max_iters; ++iter) {
    Matrix b(static_cast<std::size_t>(t.m), static_cast<std::size_t>(t.m));
    for (int i = 0; i < t.m; ++i)
      for (int r = 0; r < t.m; ++r)
        b(static_cast<std::size_t>(r), static_cast<std::size_t>(i)) =
            t.a(static_cast<std::size_t>(r), static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)]));
    auto f = lu_factor(b);
    if (f.singular) return LpStatus::IterationLimit;

    // refresh basics against drift
    {
      Vec r = t.rhs;
      for (int j = 0; j < t.total; ++j) {
        if (t.state[static_cast<std::size_t>(j)] == kBasic) continue;
        const double xj = t.value[static_cast<std::size_t>(j)];
        if (xj == 0.0) continue;
        for (int i = 0; i < t.m; ++i)
          r[static_cast<std::size_t>(i)] -= t.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * xj;
      }
      Vec xb = lu_solve(f, r);
      for (int i = 0; i < t.m; ++i)
        t.value[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)])] = xb[static_cast<std::size_t>(i)];
    }

    // duals: B^T y = c_B, via (PA=LU) transpose solve through explicit inverse-free path:
    // solve with the transpose by factoring B^T directly (m tiny).
    Matrix bt(static_cast<std::size_t>(t.m), static_cast<std::size_t>(t.m));
    for (int i = 0; i < t.m; ++i)
      for (int j = 0; j < t.m; ++j)
        bt(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = b(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
    Vec cb(static_cast<std::size_t>(t.m));
    for (int i = 0; i < t.m; ++i)
      cb[static_cast<std::size_t>(i)] = cost[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)])];
    Vec y = lu_solve(lu_factor(bt), cb);

    // Bland: lowest-index eligible entering variable
    int enter = -1, dir = 0;
    double enter_red = 0.0;
    for (int j = 0; j < t.total && enter < 0; ++j) {
      const int st = t.state[static_cast<std::size_t>(j)];
      if (st == kBasic) continue;
      double red = cost[static_cast<std::size_t>(j)];
      for (int i = 0; i < t.m; ++i)
        red -= y[static_cast<std::size_t>(i)] * t.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if ((st == kAtLower || st == kFreeNb) && red < -kTol) {
        enter = j; dir = +1; enter_red = red;
      } else if ((st == kAtUpper || st == kFreeNb) && red > kTol) {
        enter = j; dir = -1; enter_red = red;
      }
    }
    (void)enter_red;
    if (enter < 0) {
      if (red_out) {
        red_out->assign(static_cast<std::size_t>(t.total), 0.0);
        for (int j = 0; j < t.total; ++j) {
          if (t.state[static_cast<std::size_t>(j)] == kBasic) continue;
          double red = cost[static_cast<std::size_t>(j)];
          for (int i = 0; i < t.m; ++i)
            red -= y[static_cast<std::size_t>(i)] * t.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          (*red_out)[static_cast<std::size_t>(j)] = red;
        }
      }
      return LpStatus::Optimal;
    }

    Vec w = lu_solve(f, t.col(enter));  // B^-1 A_enter

    // ratio test
    double delta = kInf;
    int leave_pos = -1;   // position in basis
    int leave_bound = 0;  // kAtLower / kAtUpper for the leaving variable
    for (int i = 0; i < t.m; ++i) {
      const int bi = t.basis[static_cast<std::size_t>(i)];
      const double coef = dir * w[static_cast<std::size_t>(i)];
      const double xbi = t.value[static_cast<std::size_t>(bi)];
      double lim = kInf;
      int bound = 0;
      if (coef > kTol) {
        if (t.lower[static_cast<std::size_t>(bi)] > -kInf) {
          lim = (xbi - t.lower[static_cast<std::size_t>(bi)]) / coef;
          bound = kAtLower;
        }
      } else if (coef < -kTol) {
        if (t.upper[static_cast<std::size_t>(bi)] < kInf) {
          lim = (t.upper[static_cast<std::size_t>(bi)] - xbi) / (-coef);
          bound = kAtUpper;
        }
      }
      if (lim < delta - 1e-12 ||
          (lim < delta + 1e-12 && leave_pos >= 0 &&
           bi < t.basis[static_cast<std::size_t>(leave_pos)])) {
        delta = std::max(lim, 0.0);
        leave_pos = i;
        leave_bound = bound;
      }
    }
    // entering variable's own span
    const double span = t.upper[static_cast<std::size_t>(enter)] - t.lower[static_cast<std::size_t>(enter)];
    bool bound_flip = false;
    if (span < delta) {
      delta = span;
      bound_flip = true;
    }
    if (!(delta < kInf)) return LpStatus::Unbounded;

    // apply the step
    for (int i = 0; i < t.m; ++i) {
      const int bi = t.basis[static_cast<std::size_t>(i)];
      t.value[static_cast<std::size_t>(bi)] -= dir * delta * w[static_cast<std::size_t>(i)];
    }
    t.value[static_cast<std::size_t>(enter)] += dir * delta;

    if (bound_flip) {
      t.state[static_cast<std::size_t>(enter)] = (dir > 0) ? kAtUpper : kAtLower;
      t.value[static_cast<std::size_t>(enter)] =
          (dir > 0) ? t.upper[static_cast<std::size_t>(enter)] : t.lower[static_cast<std::size_t>(enter)];
      continue;
    }
    const int leaving = t.basis[static_cast<std::size_t>(leave_pos)];
    t.state[static_cast<std::size_t>(leaving)] = leave_bound;
    t.value[static_cast<std::size_t>(leaving)] =
        (leave_bound == kAtLower) ? t.lower[static_cast<std::size_t>(leaving)]
                                  : t.upper[static_cast<std::size_t>(leaving)];
    t.basis[static_cast<std::size_t>(leave_pos)] = enter;
    t.state[static_cast<std::size_t>(enter)] = kBasic;
  }
  return LpStatus::IterationLimit;
}

}  // namespace simplex_detail

inline LpSolution simplex_solve(const StandardLp& lp, int max_iters = 20000) {
  using namespace simplex_detail;
  require(static_cast<int>(lp.objective.size()) == lp.num_vars &&
              static_cast<int>(lp.rhs.size()) == lp.num_rows &&
              static_cast<int>(lp.lower.size()) == lp.num_vars &&
              static_cast<int>(lp.upper.size()) == lp.num_vars &&
              static_cast<int>(lp.eq.rows()) == lp.num_rows &&
              static_cast<int>(lp.eq.cols()) == lp.num_vars,
          "simplex_solve: malformed LP");
  for (int j = 0; j < lp.num_vars; ++j)
    require(lp.lower[static_cast<std::size_t>(j)] <= lp.upper[static_cast<std::size_t>(j)],
            "simplex_solve: lower > upper");

  const int nv = lp.num_vars, m = lp.num_rows;
  Tableau t;
  t.total = nv + m;  // structural + artificial
  t.m = m;
  t.a = Matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(t.total));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < nv; ++j)
      t.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  t.rhs = lp.rhs;
  t.lower = lp.lower;
  t.upper = lp.upper;
  t.lower.resize(static_cast<std::size_t>(t.total), 0.0);
  t.upper.resize(static_cast<std::size_t>(t.total), kInf);
  t.value.assign(static_cast<std::size_t>(t.total), 0.0);
  t.state.assign(static_cast<std::size_t>(t.total), kAtLower);

  // start structural variables at a finite bound (free ones at 0)
  for (int j = 0; j < nv; ++j) {
    if (lp.lower[static_cast<std::size_t>(j)] > -kInf) {
      t.state[static_cast<std::size_t>(j)] = kAtLower;
      t.value[static_cast<std::size_t>(j)] = lp.lower[static_cast<std::size_t>(j)];
    } else if (lp.upper[static_cast<std::size_t>(j)] < kInf) {
      t.state[static_cast<std::size_t>(j)] = kAtUpper;
      t.value[static_cast<std::size_t>(j)] = lp.upper[static_cast<std::size_t>(j)];
    } else {
      t.state[static_cast<std::size_t>(j)] = kFreeNb;
      t.value[static_cast<std::size_t>(j)] = 0.0;
    }
  }

  // artificial columns signed so initial values are nonnegative
  t.basis.resize(static_cast<std::size_t>(m));
  Vec resid = lp.rhs;
  for (int j = 0; j < nv; ++j) {
    const double xj = t.value[static_cast<std::size_t>(j)];
    if (xj == 0.0) continue;
    for (int i = 0; i < m; ++i)
      resid[static_cast<std::size_t>(i)] -= lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * xj;
  }
  for (int i = 0; i < m; ++i) {
    const int aj = nv + i;
    t.a(static_cast<std::size_t>(i), static_cast<std::size_t>(aj)) =
        (resid[static_cast<std::size_t>(i)] >= 0.0) ? 1.0 : -1.0;
    t.value[static_cast<std::size_t>(aj)] = std::fabs(resid[static_cast<std::size_t>(i)]);
    t.state[static_cast<std::size_t>(aj)] = kBasic;
    t.basis[static_cast<std::size_t>(i)] = aj;
  }

  LpSolution sol;

  // phase 1: drive artificials to zero
  Vec phase1_cost(static_cast<std::size_t>(t.total), 0.0);
  for (int i = 0; i < m; ++i) phase1_cost[static_cast<std::size_t>(nv + i)] = 1.0;
  LpStatus st = iterate(t, phase1_cost, max_iters, nullptr);
  if (st == LpStatus::IterationLimit) {
    sol.status = st;
    return sol;
  }
  double art_sum = 0.0;
  for (int i = 0; i < m; ++i) art_sum += t.value[static_cast<std::size_t>(nv + i)];
  if (art_sum > 1e-8 * (1.0 + norm_inf(lp.rhs))) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }

  // phase 2: pin artificials at zero and optimize the real objective
  for (int i = 0; i < m; ++i) {
    t.lower[static_cast<std::size_t>(nv + i)] = 0.0;
    t.upper[static_cast<std::size_t>(nv + i)] = 0.0;
    if (t.state[static_cast<std::size_t>(nv + i)] != kBasic) {
      t.state[static_cast<std::size_t>(nv + i)] = kAtLower;
      t.value[static_cast<std::size_t>(nv + i)] = 0.0;
    }
  }
  Vec phase2_cost(static_cast<std::size_t>(t.total), 0.0);
  for (int j = 0; j < nv; ++j) phase2_cost[static_cast<std::size_t>(j)] = lp.objective[static_cast<std::size_t>(j)];
  Vec red;
  st = iterate(t, phase2_cost, max_iters, &red);
  sol.status = st;
  if (st != LpStatus::Optimal) return sol;

  if (!recompute_basics(t)) {
    sol.status = LpStatus::IterationLimit;
    return sol;
  }
  sol.x.assign(t.value.begin(), t.value.begin() + nv);
  sol.objective = dot(sol.x, lp.objective);
  sol.reduced_costs.assign(red.begin(), red.begin() + nv);
  sol.var_state.assign(t.state.begin(), t.state.begin() + nv);
  return sol;
}

}  // namespace activeset
