// Problem oracles (f, e, c and first derivatives), the noise-injection layer,
// and the built-in two-dimensional test problems.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "activeset/linalg.hpp"
#include "activeset/rng.hpp"

namespace activeset {

/// Sorted 1-based inequality-constraint indices.
using ActiveSet = std::vector<int>;

struct ProblemOracle {
  int n = 0;  // decision dimension
  int p = 0;  // equality count
  int q = 0;  // inequality count
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> e;        // length p
  std::function<Vec(const Vec&)> c;        // length q
  std::function<Vec(const Vec&)> grad_f;   // length n
  std::function<Matrix(const Vec&)> jac_e; // n x p, column j = grad e_j
  std::function<Matrix(const Vec&)> jac_c; // n x q, column j = grad c_j
};

/// Worst-case norm error bounds attached to an Evaluation
/// (all zero for exact evaluations).
struct ErrorBounds {
  double f = 0.0;
  double e = 0.0;
  double c = 0.0;
  double grad_f = 0.0;
  double jac_e = 0.0;
  double jac_c = 0.0;
};

/// Entrywise uniform noise on [-level, level], reproducible from the seed.
struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// Snapshot of all problem values at a point, exact or noise-corrupted.
struct Evaluation {
  Vec x;
  double f_val = 0.0;
  Vec e_val;
  Vec c_val;
  Vec grad_f;
  Matrix jac_e;
  Matrix jac_c;
  ErrorBounds bounds;
  int n = 0, p = 0, q = 0;
};

inline Evaluation evaluate_exact(const ProblemOracle& o, const Vec& x) {
  require(static_cast<int>(x.size()) == o.n, "evaluate_exact: x length != n");
  Evaluation ev;
  ev.x = x;
  ev.n = o.n;
  ev.p = o.p;
  ev.q = o.q;
  ev.f_val = o.f(x);
  ev.e_val = o.p > 0 ? o.e(x) : Vec{};
  ev.c_val = o.q > 0 ? o.c(x) : Vec{};
  ev.grad_f = o.grad_f(x);
  ev.jac_e = o.p > 0 ? o.jac_e(x) : Matrix(static_cast<std::size_t>(o.n), 0);
  ev.jac_c = o.q > 0 ? o.jac_c(x) : Matrix(static_cast<std::size_t>(o.n), 0);
  require(static_cast<int>(ev.e_val.size()) == o.p, "oracle: e size != p");
  require(static_cast<int>(ev.c_val.size()) == o.q, "oracle: c size != q");
  require(static_cast<int>(ev.grad_f.size()) == o.n, "oracle: grad_f size != n");
  return ev;
}

/// Perturbs every scalar output of evaluate_exact by an independent uniform
/// draw on [-eps, eps].  Draw order: f, e, c, grad_f, jac_e (row-major),
/// jac_c (row-major).  The attached bounds are the implied worst cases
/// (2-norm for vectors, inf-induced norm for Jacobians).
inline Evaluation evaluate_noisy(const ProblemOracle& o, const Vec& x,
                                 const NoiseSpec& spec) {
  require(spec.level >= 0.0, "evaluate_noisy: negative noise level");
  Evaluation ev = evaluate_exact(o, x);
  if (spec.level == 0.0) return ev;

  const double eps = spec.level;
  SplitMix64 g(spec.seed);
  ev.f_val += g.symmetric(eps);
  for (double& v : ev.e_val) v += g.symmetric(eps);
  for (double& v : ev.c_val) v += g.symmetric(eps);
  for (double& v : ev.grad_f) v += g.symmetric(eps);
  for (double& v : ev.jac_e.data()) v += g.symmetric(eps);
  for (double& v : ev.jac_c.data()) v += g.symmetric(eps);

  ev.bounds.f = eps;
  ev.bounds.e = std::sqrt(static_cast<double>(o.p)) * eps;
  ev.bounds.c = std::sqrt(static_cast<double>(o.q)) * eps;
  ev.bounds.grad_f = std::sqrt(static_cast<double>(o.n)) * eps;
  ev.bounds.jac_e = static_cast<double>(o.p) * eps;
  ev.bounds.jac_c = static_cast<double>(o.q) * eps;
  return ev;
}

/// Smooth quadratic-penalty composite f(x) + (mu/2)(||e||^2 + ||[c]+||^2)
/// and its exact gradient.
inline std::pair<double, Vec> penalty_objective(const ProblemOracle& o,
                                                const Vec& x, double mu) {
  require(mu > 0.0, "penalty_objective: mu must be positive");
  Evaluation ev = evaluate_exact(o, x);
  double val = ev.f_val;
  Vec grad = ev.grad_f;
  for (int j = 0; j < o.p; ++j) {
    val += 0.5 * mu * ev.e_val[j] * ev.e_val[j];
    for (int i = 0; i < o.n; ++i)
      grad[i] += mu * ev.e_val[j] * ev.jac_e(i, j);
  }
  for (int j = 0; j < o.q; ++j) {
    const double cp = std::max(ev.c_val[j], 0.0);
    val += 0.5 * mu * cp * cp;
    if (cp > 0.0)
      for (int i = 0; i < o.n; ++i) grad[i] += mu * cp * ev.jac_c(i, j);
  }
  return {val, grad};
}

struct TestProblem {
  ProblemOracle oracle;
  Vec x_star;        // reference minimizer
  ActiveSet a_star;  // optimal active set (1-based)
  std::string name;
};

namespace detail {

// Gradient descent with Armijo backtracking on the quadratic penalty;
// supplies the Newton seed for the minimizer fixture.
inline Vec penalty_descent(const ProblemOracle& o, Vec x, double mu,
                           double grad_tol, int max_iters) {
  for (int k = 0; k < max_iters; ++k) {
    auto [val, grad] = penalty_objective(o, x, mu);
    if (norm_inf(grad) <= grad_tol) break;
    double step = 1.0;
    const double slope = dot(grad, grad);
    while (step > 1e-16) {
      Vec xt(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] - step * grad[i];
      if (penalty_objective(o, xt, mu).first <= val - 1e-4 * step * slope) {
        x = std::move(xt);
        break;
      }
      step *= 0.5;
    }
  }
  return x;
}

// Newton on the active-set KKT residual
//   [grad f + sum_{i in A} z_i grad c_i ; c_A] = 0
// with a central-difference Jacobian.  Refines the penalty solution to
// machine-level residual.
inline Vec kkt_polish(const ProblemOracle& o, Vec x, const ActiveSet& active,
                      int iters = 60) {
  const int n = o.n;
  const int l = static_cast<int>(active.size());
  const int m = n + l;
  Vec u(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  // initial multipliers from least-squares of the stationarity block
  // (desk scale: start at 1, Newton fixes it)
  for (int i = 0; i < l; ++i) u[static_cast<std::size_t>(n + i)] = 1.0;

  auto residual = [&](const Vec& uu) {
    Vec xx(uu.begin(), uu.begin() + n);
    Vec r(static_cast<std::size_t>(m), 0.0);
    Vec gf = o.grad_f(xx);
    Matrix jc = o.jac_c(xx);
    Vec cv = o.c(xx);
    for (int i = 0; i < n; ++i) {
      double s = gf[static_cast<std::size_t>(i)];
      for (int k = 0; k < l; ++k)
        s += uu[static_cast<std::size_t>(n + k)] * jc(static_cast<std::size_t>(i), static_cast<std::size_t>(active[static_cast<std::size_t>(k)] - 1));
      r[static_cast<std::size_t>(i)] = s;
    }
    for (int k = 0; k < l; ++k)
      r[static_cast<std::size_t>(n + k)] = cv[static_cast<std::size_t>(active[static_cast<std::size_t>(k)] - 1)];
    return r;
  };

  for (int it = 0; it < iters; ++it) {
    Vec r = residual(u);
    if (norm_inf(r) <= 1e-13) break;
    const double h = 1e-7;
    Matrix jac(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      Vec up = u, um = u;
      up[static_cast<std::size_t>(j)] += h;
      um[static_cast<std::size_t>(j)] -= h;
      Vec rp = residual(up), rm = residual(um);
      for (int i = 0; i < m; ++i)
        jac(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            (rp[static_cast<std::size_t>(i)] - rm[static_cast<std::size_t>(i)]) / (2.0 * h);
    }
    Vec du = lu_solve(lu_factor(jac), r);
    for (int i = 0; i < m; ++i) u[static_cast<std::size_t>(i)] -= du[static_cast<std::size_t>(i)];
  }
  return Vec(u.begin(), u.begin() + n);
}

}  // namespace detail

/// Builds one of the two built-in problems: minimize f1 or f2 subject to
///   c1(x) = x1^2 - x2 <= 0  and  c2(x) = x1^2 + x2 - 1/2 <= 0,
/// with the minimizer fixture computed by penalty descent plus a Newton
/// polish on the active KKT system.
inline TestProblem make_parabola_problem(const std::string& which) {
  require(which == "f1" || which == "f2", "make_parabola_problem: unknown problem");
  TestProblem tp;
  tp.name = which;
  ProblemOracle& o = tp.oracle;
  o.n = 2;
  o.p = 0;
  o.q = 2;
  if (which == "f1") {
    o.f = [](const Vec& x) {
      return (x[0] + 0.5) * (x[0] + 0.5) + 4.0 * (x[1] - 0.5) * (x[1] - 0.5);
    };
    o.grad_f = [](const Vec& x) {
      return Vec{2.0 * (x[0] + 0.5), 8.0 * (x[1] - 0.5)};
    };
    tp.a_star = {2};
  } else {
    o.f = [](const Vec& x) {
      return 4.0 * (x[0] + 0.6) * (x[0] + 0.6) + (x[1] - 0.25) * (x[1] - 0.25);
    };
    o.grad_f = [](const Vec& x) {
      return Vec{8.0 * (x[0] + 0.6), 2.0 * (x[1] - 0.25)};
    };
    tp.a_star = {1, 2};
  }
  o.e = [](const Vec&) { return Vec{}; };
  o.jac_e = [](const Vec&) { return Matrix(2, 0); };
  o.c = [](const Vec& x) {
    return Vec{x[0] * x[0] - x[1], x[0] * x[0] + x[1] - 0.5};
  };
  o.jac_c = [](const Vec& x) {
    Matrix j(2, 2);
    j(0, 0) = 2.0 * x[0];
    j(1, 0) = -1.0;
    j(0, 1) = 2.0 * x[0];
    j(1, 1) = 1.0;
    return j;
  };

  Vec seed = detail::penalty_descent(o, Vec{0.0, 0.25}, 1e4, 1e-8, 500);
  tp.x_star = detail::kkt_polish(o, seed, tp.a_star);
  return tp;
}

}  // namespace activeset
