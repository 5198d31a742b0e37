// Property and oracle suites shared by the verify subcommand and the tests:
// random-instance generators, the vertex-enumeration LP oracle, and one
// check function per module-level invariant.
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "activeset/experiments.hpp"
#include "activeset/kkt.hpp"
#include "activeset/lp_identify.hpp"
#include "activeset/problem.hpp"
#include "activeset/qp.hpp"
#include "activeset/rng.hpp"
#include "activeset/simplex.hpp"

namespace activeset {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace check {

inline Matrix random_matrix(SplitMix64& g, int rows, int cols, double scale = 1.0) {
  Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (double& v : m.data()) v = g.symmetric(scale);
  return m;
}

inline Vec random_vec(SplitMix64& g, int n, double scale = 1.0) {
  Vec v(static_cast<std::size_t>(n));
  for (double& x : v) x = g.symmetric(scale);
  return v;
}

/// Synthetic Evaluation with independently drawn values (no oracle behind it).
inline Evaluation random_evaluation(SplitMix64& g, int n, int p, int q, double scale = 1.0) {
  Evaluation ev;
  ev.n = n;
  ev.p = p;
  ev.q = q;
  ev.x = random_vec(g, n, scale);
  ev.f_val = g.symmetric(scale);
  ev.e_val = random_vec(g, p, scale);
  ev.c_val = random_vec(g, q, scale);
  ev.grad_f = random_vec(g, n, scale);
  ev.jac_e = random_matrix(g, n, p, scale);
  ev.jac_c = random_matrix(g, n, q, scale);
  return ev;
}

/// Entrywise-perturbed copy of an exact Evaluation, with the worst-case norm
/// bounds attached (mirrors evaluate_noisy for synthetic data).
inline Evaluation perturb_evaluation(SplitMix64& g, const Evaluation& exact, double eps) {
  Evaluation ev = exact;
  ev.f_val += g.symmetric(eps);
  for (double& v : ev.e_val) v += g.symmetric(eps);
  for (double& v : ev.c_val) v += g.symmetric(eps);
  for (double& v : ev.grad_f) v += g.symmetric(eps);
  for (double& v : ev.jac_e.data()) v += g.symmetric(eps);
  for (double& v : ev.jac_c.data()) v += g.symmetric(eps);
  ev.bounds.f = eps;
  ev.bounds.e = std::sqrt(static_cast<double>(ev.p)) * eps;
  ev.bounds.c = std::sqrt(static_cast<double>(ev.q)) * eps;
  ev.bounds.grad_f = std::sqrt(static_cast<double>(ev.n)) * eps;
  ev.bounds.jac_e = static_cast<double>(ev.p) * eps;
  ev.bounds.jac_c = static_cast<double>(ev.q) * eps;
  return ev;
}

/// eps_rho_bar from the two-sided multiplier bound:
///   3 sqrt(q) (eps_c + sqrt(eps_c) sqrt(Mbar)) + sqrt(p) eps_e
///   + sqrt(n) eps_grad_f + sqrt(n) Mbar (eps_jac_e + eps_jac_c).
inline double eps_rho_bar(const Evaluation& ev, double m_bar) {
  const ErrorBounds& b = ev.bounds;
  return 3.0 * std::sqrt(static_cast<double>(ev.q)) *
             (b.c + std::sqrt(b.c) * std::sqrt(m_bar)) +
         std::sqrt(static_cast<double>(ev.p)) * b.e +
         std::sqrt(static_cast<double>(ev.n)) * b.grad_f +
         std::sqrt(static_cast<double>(ev.n)) * m_bar * (b.jac_e + b.jac_c);
}

/// eps_rho for the linear (non-square-root) sums:
///   q eps_c (1 + Mbar) + sqrt(p) eps_e + sqrt(n) eps_grad_f
///   + sqrt(n) Mbar (eps_jac_e + eps_jac_c).
inline double eps_rho(const Evaluation& ev, double m_bar) {
  const ErrorBounds& b = ev.bounds;
  return static_cast<double>(ev.q) * b.c * (1.0 + m_bar) +
         std::sqrt(static_cast<double>(ev.p)) * b.e +
         std::sqrt(static_cast<double>(ev.n)) * b.grad_f +
         std::sqrt(static_cast<double>(ev.n)) * m_bar * (b.jac_e + b.jac_c);
}

/// Brute-force LP oracle: enumerate basic solutions (m variables solved from
/// the equalities, the rest fixed at a bound).  Requires finite bounds on
/// every variable.  Returns the best objective, or +inf if no feasible
/// vertex exists.
inline double vertex_enumeration_objective(const StandardLp& lp) {
  const int nv = lp.num_vars, m = lp.num_rows;
  std::vector<int> idx(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) idx[static_cast<std::size_t>(i)] = i;
  double best = kInf;

  std::vector<int> subset;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(subset.size()) == m) {
      std::vector<int> rest;
      for (int j = 0; j < nv; ++j)
        if (std::find(subset.begin(), subset.end(), j) == subset.end()) rest.push_back(j);
      const int nr = static_cast<int>(rest.size());
      for (std::size_t combo = 0; combo < (std::size_t{1} << nr); ++combo) {
        Vec x(static_cast<std::size_t>(nv), 0.0);
        for (int k = 0; k < nr; ++k) {
          const int j = rest[static_cast<std::size_t>(k)];
          x[static_cast<std::size_t>(j)] = (combo & (std::size_t{1} << k))
                                               ? lp.upper[static_cast<std::size_t>(j)]
                                               : lp.lower[static_cast<std::size_t>(j)];
        }
        Matrix a(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
        Vec rhs = lp.rhs;
        for (int i = 0; i < m; ++i) {
          for (int k = 0; k < m; ++k)
            a(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
                lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(subset[static_cast<std::size_t>(k)]));
          for (int k = 0; k < nr; ++k)
            rhs[static_cast<std::size_t>(i)] -=
                lp.eq(static_cast<std::size_t>(i), static_cast<std::size_t>(rest[static_cast<std::size_t>(k)])) *
                x[static_cast<std::size_t>(rest[static_cast<std::size_t>(k)])];
        }
        auto f = lu_factor(a);
        if (f.singular) continue;
        Vec xb = lu_solve(f, rhs);
        bool feas = true;
        for (int k = 0; k < m && feas; ++k) {
          const int j = subset[static_cast<std::size_t>(k)];
          if (xb[static_cast<std::size_t>(k)] < lp.lower[static_cast<std::size_t>(j)] - 1e-9 ||
              xb[static_cast<std::size_t>(k)] > lp.upper[static_cast<std::size_t>(j)] + 1e-9)
            feas = false;
        }
        if (!feas) continue;
        for (int k = 0; k < m; ++k)
          x[static_cast<std::size_t>(subset[static_cast<std::size_t>(k)])] = xb[static_cast<std::size_t>(k)];
        best = std::min(best, dot(x, lp.objective));
      }
      return;
    }
    for (int j = start; j < nv; ++j) {
      subset.push_back(j);
      rec(j + 1);
      subset.pop_back();
    }
  };
  rec(0);
  return best;
}

/// Random feasible box LP: interior point chosen first, rhs derived from it.
inline StandardLp random_box_lp(SplitMix64& g) {
  StandardLp lp;
  lp.num_vars = 2 + static_cast<int>(g.next_u64() % 5);  // 2..6
  lp.num_rows = 1 + static_cast<int>(g.next_u64() % 4);  // 1..4
  if (lp.num_rows >= lp.num_vars) lp.num_rows = lp.num_vars - 1;
  lp.objective = random_vec(g, lp.num_vars, 2.0);
  lp.lower.resize(static_cast<std::size_t>(lp.num_vars));
  lp.upper.resize(static_cast<std::size_t>(lp.num_vars));
  Vec x0(static_cast<std::size_t>(lp.num_vars));
  for (int j = 0; j < lp.num_vars; ++j) {
    const double lo = g.symmetric(2.0);
    lp.lower[static_cast<std::size_t>(j)] = lo;
    lp.upper[static_cast<std::size_t>(j)] = lo + 0.5 + 3.0 * g.next_unit();
    x0[static_cast<std::size_t>(j)] = lp.lower[static_cast<std::size_t>(j)] +
        (lp.upper[static_cast<std::size_t>(j)] - lp.lower[static_cast<std::size_t>(j)]) * g.next_unit();
  }
  lp.eq = random_matrix(g, lp.num_rows, lp.num_vars, 2.0);
  lp.rhs = lp.eq.mul(x0);
  return lp;
}

/// Random Evaluation whose linearized constraint system is feasible by
/// construction (a feasible step is drawn first).
inline Evaluation random_feasible_qp_instance(SplitMix64& g) {
  const int n = 2 + static_cast<int>(g.next_u64() % 4);  // 2..5
  const int p = static_cast<int>(g.next_u64() % 3);      // 0..2
  const int q = 1 + static_cast<int>(g.next_u64() % 4);  // 1..4
  Evaluation ev;
  ev.n = n;
  ev.p = p;
  ev.q = q;
  ev.x = random_vec(g, n);
  ev.grad_f = random_vec(g, n, 2.0);
  ev.jac_e = random_matrix(g, n, p, 2.0);
  ev.jac_c = random_matrix(g, n, q, 2.0);
  Vec d0 = random_vec(g, n, 1.0);
  Vec elin = ev.jac_e.tmul(d0);
  ev.e_val.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) ev.e_val[static_cast<std::size_t>(j)] = -elin[static_cast<std::size_t>(j)];
  Vec clin = ev.jac_c.tmul(d0);
  ev.c_val.resize(static_cast<std::size_t>(q));
  for (int j = 0; j < q; ++j)
    ev.c_val[static_cast<std::size_t>(j)] = -clin[static_cast<std::size_t>(j)] - 0.05 - g.next_unit();
  ev.f_val = g.symmetric(2.0);
  return ev;
}

// ---- check functions ----------------------------------------------------

inline CheckResult lu_reconstruction(int count, std::uint64_t seed) {
  SplitMix64 g(seed);
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(g.next_u64() % 7);
    Matrix a = random_matrix(g, n, n, 3.0);
    auto f = lu_factor(a);
    if (f.singular) continue;
    // rebuild P*A - L*U elementwise
    const double tol = 1e-12 * a.norm_inf();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double lu = 0.0;
        for (int k = 0; k <= std::min(i, j); ++k) {
          const double lik = (k == i) ? 1.0 : f.lu(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
          if (k <= j) lu += lik * f.lu(static_cast<std::size_t>(k), static_cast<std::size_t>(j));
        }
        const double pa = a(static_cast<std::size_t>(f.perm[static_cast<std::size_t>(i)]), static_cast<std::size_t>(j));
        if (std::fabs(pa - lu) > tol)
          return {"lu-reconstruction", false, "elementwise residual above 1e-12*||A||inf"};
      }
    // residual of a solve
    Vec b = random_vec(g, n, 3.0);
    Vec x = lu_solve(f, b);
    Vec ax = a.mul(x);
    double r = 0.0;
    for (int i = 0; i < n; ++i) r = std::max(r, std::fabs(ax[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]));
    if (r > 1e-10 * (a.norm_inf() * norm_inf(x) + norm_inf(b)))
      return {"lu-reconstruction", false, "solve residual above tolerance"};
  }
  return {"lu-reconstruction", true, std::to_string(count) + " random factorizations"};
}

inline CheckResult perturbation_bound(int count, std::uint64_t seed) {
  SplitMix64 g(seed);
  int done = 0;
  while (done < count) {
    const int n = 2 + static_cast<int>(g.next_u64() % 5);
    Matrix k = random_matrix(g, n, n, 2.0);
    for (int i = 0; i < n; ++i) k(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) += 3.0;  // keep well conditioned
    auto f = lu_factor(k);
    if (f.singular) continue;
    Matrix dk = random_matrix(g, n, n, 0.05);
    Vec b = random_vec(g, n, 2.0);
    if (norm_inf(b) < 1e-6) continue;
    Vec db = random_vec(g, n, 0.05);
    if (dk.norm_inf() * inverse(k).norm_inf() >= 0.9) continue;
    if (!perturbation_bound_holds(k, dk, b, db))
      return {"perturbation-bound", false, "bound violated on a conforming instance"};
    ++done;
  }
  return {"perturbation-bound", true, std::to_string(count) + " conforming instances"};
}

inline CheckResult lemma_rho_bar_vs_rho(int count, std::uint64_t seed) {
  SplitMix64 g(seed);
  for (int t = 0; t < count; ++t) {
    const int n = 1 + static_cast<int>(g.next_u64() % 5);
    const int p = static_cast<int>(g.next_u64() % 3);
    const int q = 1 + static_cast<int>(g.next_u64() % 6);
    Evaluation ev = random_evaluation(g, n, p, q, 2.0);
    MultiplierPair m{random_vec(g, p, 2.0), Vec(static_cast<std::size_t>(q))};
    for (double& z : m.z) z = 2.0 * g.next_unit();
    const double r = rho(ev, m);
    const double rb = rho_bar(ev, m);
    if (rb > r + std::sqrt(static_cast<double>(q)) * std::sqrt(r) + 1e-12 * (1.0 + r))
      return {"rho-bar-vs-rho", false, "rho_bar exceeded rho + sqrt(q) sqrt(rho)"};
  }
  return {"rho-bar-vs-rho", true, std::to_string(count) + " random multiplier pairs"};
}

inline CheckResult lemma_two_sided_bound(int count, std::uint64_t seed, double m_bar = 10.0,
                                         double eps = 1e-3) {
  SplitMix64 g(seed);
  for (int t = 0; t < count; ++t) {
    const int n = 1 + static_cast<int>(g.next_u64() % 5);
    const int p = static_cast<int>(g.next_u64() % 3);
    const int q = 1 + static_cast<int>(g.next_u64() % 6);
    Evaluation exact = random_evaluation(g, n, p, q, 1.0);
    for (double& c : exact.c_val) c = g.symmetric(m_bar);  // ||c||inf <= Mbar
    MultiplierPair m{random_vec(g, p, m_bar), Vec(static_cast<std::size_t>(q))};
    for (double& z : m.z) z = m_bar * g.next_unit();
    Evaluation noisy = perturb_evaluation(g, exact, eps);

    const double psi_exact = psi(exact, m);
    const double rt = rho(noisy, m);
    const double rbt = rho_bar(noisy, m);
    const double er = eps_rho(noisy, m_bar);
    const double erb = eps_rho_bar(noisy, m_bar);
    if (rt / m_bar - er > psi_exact + 1e-12)
      return {"two-sided-multiplier-bound", false, "lower bound violated"};
    if (psi_exact > rbt + erb + 1e-12)
      return {"two-sided-multiplier-bound", false, "upper bound violated"};
  }
  return {"two-sided-multiplier-bound", true, std::to_string(count) + " exact/noisy pairs"};
}

inline CheckResult simplex_against_vertices(int count, std::uint64_t seed) {
  SplitMix64 g(seed);
  for (int t = 0; t < count; ++t) {
    StandardLp lp = random_box_lp(g);
    LpSolution sol = simplex_solve(lp);
    if (sol.status != LpStatus::Optimal)
      return {"simplex-vs-vertex-enum", false, std::string("unexpected status ") + to_string(sol.status)};
    const double oracle = vertex_enumeration_objective(lp);
    if (std::fabs(sol.objective - oracle) > 1e-7 * (1.0 + std::fabs(oracle)))
      return {"simplex-vs-vertex-enum", false, "objective mismatch vs vertex enumeration"};
    for (int j = 0; j < lp.num_vars; ++j) {
      const double red = sol.reduced_costs[static_cast<std::size_t>(j)];
      const int st = sol.var_state[static_cast<std::size_t>(j)];
      if (st == 1 && red < -1e-9) return {"simplex-vs-vertex-enum", false, "reduced cost < -1e-9 at lower bound"};
      if (st == 2 && red > 1e-9) return {"simplex-vs-vertex-enum", false, "reduced cost > 1e-9 at upper bound"};
    }
  }
  return {"simplex-vs-vertex-enum", true, std::to_string(count) + " random box LPs"};
}

inline CheckResult qp_against_oracle(int count, std::uint64_t seed) {
  SplitMix64 g(seed);
  const double thetas[] = {1.0, 5.0, 20.0};
  for (int t = 0; t < count; ++t) {
    Evaluation ev = random_feasible_qp_instance(g);
    const double theta = thetas[t % 3];
    Vec d_oracle = enumerate_qp_oracle(ev, theta);
    QpParams params;
    params.theta = theta;
    params.nu = 1e4;
    QpResult res = solve_penalized_qp(ev, params);
    if (!res.converged || res.gap > 1e-8)
      return {"qp-vs-enumeration-oracle", false, "duality gap above 1e-8"};
    double diff = 0.0;
    for (int i = 0; i < ev.n; ++i)
      diff = std::max(diff, std::fabs(res.d[static_cast<std::size_t>(i)] - d_oracle[static_cast<std::size_t>(i)]));
    if (diff > 1e-6) {
      std::ostringstream os;
      os << "step mismatch " << diff << " at instance " << t;
      return {"qp-vs-enumeration-oracle", false, os.str()};
    }
  }
  return {"qp-vs-enumeration-oracle", true, std::to_string(count) + " feasible instances, theta in {1,5,20}"};
}

inline CheckResult omega_minimality(int spot_checks, std::uint64_t seed) {
  SplitMix64 g(seed);
  const int n = 3, p = 1, q = 3;
  Evaluation ev = random_evaluation(g, n, p, q, 1.5);
  OmegaResult om = omega_bruteforce(ev, 100.0);
  for (int t = 0; t < spot_checks; ++t) {
    MultiplierPair m{random_vec(g, p, 50.0), Vec(static_cast<std::size_t>(q))};
    for (double& z : m.z) z = 100.0 * g.next_unit();
    if (om.value > psi(ev, m) + 1e-9)
      return {"omega-minimality", false, "enumerated omega above a sampled psi"};
  }
  return {"omega-minimality", true, std::to_string(spot_checks) + " sampled multiplier pairs"};
}

inline CheckResult noise_model(std::uint64_t seed) {
  TestProblem tp = make_parabola_problem("f1");
  const Vec x{0.1, 0.2};
  Evaluation exact = evaluate_exact(tp.oracle, x);

  Evaluation zero = evaluate_noisy(tp.oracle, x, {0.0, seed});
  if (zero.f_val != exact.f_val || zero.c_val != exact.c_val || zero.grad_f != exact.grad_f)
    return {"noise-model", false, "zero-noise evaluation not bitwise exact"};

  const double eps = 1e-2;
  double mean_dev = 0.0;
  int count = 0;
  for (int t = 0; t < 1000; ++t) {
    Evaluation nv = evaluate_noisy(tp.oracle, x, {eps, derive_seed(seed, static_cast<std::uint64_t>(t))});
    auto check_scalar = [&](double noisy, double ex) {
      const double dev = noisy - ex;
      if (std::fabs(dev) > eps) return false;
      mean_dev += dev;
      ++count;
      return true;
    };
    if (!check_scalar(nv.f_val, exact.f_val)) return {"noise-model", false, "scalar deviation above eps"};
    for (int i = 0; i < tp.oracle.q; ++i)
      if (!check_scalar(nv.c_val[static_cast<std::size_t>(i)], exact.c_val[static_cast<std::size_t>(i)]))
        return {"noise-model", false, "constraint deviation above eps"};
    for (int i = 0; i < tp.oracle.n; ++i)
      if (!check_scalar(nv.grad_f[static_cast<std::size_t>(i)], exact.grad_f[static_cast<std::size_t>(i)]))
        return {"noise-model", false, "gradient deviation above eps"};
    for (std::size_t i = 0; i < nv.jac_c.data().size(); ++i)
      if (!check_scalar(nv.jac_c.data()[i], exact.jac_c.data()[i]))
        return {"noise-model", false, "jacobian deviation above eps"};
  }
  mean_dev /= count;
  // uniform on [-eps, eps]: sd = eps/sqrt(3); 3 standard errors of the mean
  const double se = eps / std::sqrt(3.0) / std::sqrt(static_cast<double>(count));
  if (std::fabs(mean_dev) > 3.0 * se)
    return {"noise-model", false, "empirical mean deviation outside 3 standard errors"};
  return {"noise-model", true, "bounds, determinism, and mean-zero statistics"};
}

inline CheckResult minimizer_fixtures() {
  for (const char* name : {"f1", "f2"}) {
    TestProblem tp = make_parabola_problem(name);
    Evaluation ev = evaluate_exact(tp.oracle, tp.x_star);
    for (double ci : ev.c_val)
      if (ci > 1e-9) return {"minimizer-fixtures", false, std::string(name) + ": x_star infeasible"};
    if (active_set_exact(ev.c_val, 1e-8) != tp.a_star)
      return {"minimizer-fixtures", false, std::string(name) + ": a_star inconsistent with c(x_star)"};
    ReducedKktSolution rk = solve_reduced_kkt(ev, tp.a_star, 5.0);
    MultiplierPair m{rk.alpha, Vec(static_cast<std::size_t>(tp.oracle.q), 0.0)};
    for (std::size_t j = 0; j < tp.a_star.size(); ++j)
      m.z[static_cast<std::size_t>(tp.a_star[j] - 1)] = rk.beta_active[j];
    if (psi(ev, m) > 1e-7)
      return {"minimizer-fixtures", false, std::string(name) + ": stationarity residual above 1e-7"};
    if (norm_inf(rk.d) > 1e-8 || !rk.beta_positive || !rk.inactive_strict)
      return {"minimizer-fixtures", false, std::string(name) + ": reduced KKT conditions fail at x_star"};
  }
  return {"minimizer-fixtures", true, "feasibility, active set, and KKT residual on f1/f2"};
}

inline std::vector<CheckResult> run_all(bool quick, std::uint64_t seed = 20260823ULL) {
  const int big = quick ? 50 : 200;
  std::vector<CheckResult> results;
  results.push_back(lu_reconstruction(big, seed + 1));
  results.push_back(perturbation_bound(big, seed + 2));
  results.push_back(lemma_rho_bar_vs_rho(quick ? 200 : 1000, seed + 3));
  results.push_back(lemma_two_sided_bound(big, seed + 4));
  results.push_back(simplex_against_vertices(big, seed + 5));
  results.push_back(qp_against_oracle(quick ? 60 : 500, seed + 6));
  results.push_back(omega_minimality(quick ? 50 : 100, seed + 7));
  results.push_back(noise_model(seed + 8));
  results.push_back(minimizer_fixtures());
  return results;
}

}  // namespace check
}  // namespace activeset
