// The LP-LPEC identification pipeline: assemble the multiplier LP, solve it
// with the bounded simplex, evaluate rho_bar at the solution, and apply the
// threshold rule.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "activeset/kkt.hpp"
#include "activeset/problem.hpp"
#include "activeset/simplex.hpp"

namespace activeset {

struct LpLpecParams {
  double M = 1e8;        // box bound on z
  double beta = 0.7071;  // threshold scale
  double sigma = 0.7;    // threshold exponent, in (0,1)
};

struct LpLpecResult {
  MultiplierPair multipliers;
  double rho_tilde = 0.0;
  double rho_bar_tilde = 0.0;
  ActiveSet active_estimate;
};

struct identification_error : std::runtime_error {
  LpStatus status;
  explicit identification_error(LpStatus s)
      : std::runtime_error(std::string("identify_lp: LP terminated with status ") + to_string(s)),
        status(s) {}
};

/// Variables: y (p, free), z (q, [0, M]), r (n, >=0), s (n, >=0).
/// Equalities: grad_f + Je y + Jc z = r - s.
/// Objective: 1'r + 1's + sum_{c_i<0} (-c_i) z_i; the constant parts of rho
/// (||e||_1 and the nonnegative-c sum) stay out of the LP.
inline StandardLp assemble_lp_lpec(const Evaluation& ev, const LpLpecParams& params) {
  require(params.M > 0.0, "assemble_lp_lpec: M must be positive");
  const int n = ev.n, p = ev.p, q = ev.q;
  StandardLp lp;
  lp.num_vars = p + q + 2 * n;
  lp.num_rows = n;
  lp.objective.assign(static_cast<std::size_t>(lp.num_vars), 0.0);
  lp.lower.assign(static_cast<std::size_t>(lp.num_vars), 0.0);
  lp.upper.assign(static_cast<std::size_t>(lp.num_vars), kInf);
  lp.eq = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(lp.num_vars));
  lp.rhs.resize(static_cast<std::size_t>(n));

  for (int j = 0; j < p; ++j) lp.lower[static_cast<std::size_t>(j)] = -kInf;
  for (int i = 0; i < q; ++i) {
    lp.upper[static_cast<std::size_t>(p + i)] = params.M;
    const double ci = ev.c_val[static_cast<std::size_t>(i)];
    if (ci < 0.0) lp.objective[static_cast<std::size_t>(p + i)] = -ci;
  }
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < p; ++j)
      lp.eq(static_cast<std::size_t>(r), static_cast<std::size_t>(j)) =
          ev.jac_e(static_cast<std::size_t>(r), static_cast<std::size_t>(j));
    for (int i = 0; i < q; ++i)
      lp.eq(static_cast<std::size_t>(r), static_cast<std::size_t>(p + i)) =
          ev.jac_c(static_cast<std::size_t>(r), static_cast<std::size_t>(i));
    lp.eq(static_cast<std::size_t>(r), static_cast<std::size_t>(p + q + r)) = -1.0;
    lp.eq(static_cast<std::size_t>(r), static_cast<std::size_t>(p + q + n + r)) = 1.0;
    lp.rhs[static_cast<std::size_t>(r)] = -ev.grad_f[static_cast<std::size_t>(r)];
    lp.objective[static_cast<std::size_t>(p + q + r)] = 1.0;
    lp.objective[static_cast<std::size_t>(p + q + n + r)] = 1.0;
  }
  return lp;
}

/// Solves the multiplier LP and applies the threshold rule
///   A_LP = { i : c_i >= -(beta * rho_bar)^sigma }.
/// With rho_bar = 0 the threshold is 0 and only indices with c_i >= 0 enter.
inline LpLpecResult identify_lp(const Evaluation& ev, const LpLpecParams& params) {
  require(params.beta > 0.0, "identify_lp: beta must be positive");
  require(params.sigma > 0.0 && params.sigma < 1.0, "identify_lp: sigma must lie in (0,1)");
  StandardLp lp = assemble_lp_lpec(ev, params);
  LpSolution sol = simplex_solve(lp);
  if (sol.status != LpStatus::Optimal) throw identification_error(sol.status);

  LpLpecResult res;
  res.multipliers.y.assign(sol.x.begin(), sol.x.begin() + ev.p);
  res.multipliers.z.assign(sol.x.begin() + ev.p, sol.x.begin() + ev.p + ev.q);
  for (double& zi : res.multipliers.z) zi = std::max(zi, 0.0);  // clip simplex roundoff
  res.rho_tilde = rho(ev, res.multipliers);
  res.rho_bar_tilde = rho_bar(ev, res.multipliers);

  const double threshold = -std::pow(params.beta * res.rho_bar_tilde, params.sigma);
  for (int i = 0; i < ev.q; ++i)
    if (ev.c_val[static_cast<std::size_t>(i)] >= threshold)
      res.active_estimate.push_back(i + 1);
  return res;
}

}  // namespace activeset
