// KKT residual measures (psi, kappa, rho, rho_bar) over an Evaluation, the
// active-set helpers, and the brute-force LPEC oracle for omega(x).
// The noisy variants of the measures are the same code applied to a noisy
// Evaluation.
#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "activeset/problem.hpp"
#include "activeset/simplex.hpp"

namespace activeset {

struct MultiplierPair {
  Vec y;  // equality multipliers, length p
  Vec z;  // inequality multipliers, length q
};

inline std::string format_active_set(const ActiveSet& a) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) os << ',';
    os << a[i];
  }
  os << '}';
  return os.str();
}

/// {i : c_i >= -tol}, 1-based.
inline ActiveSet active_set_exact(const Vec& c_vals, double tol) {
  require(tol >= 0.0, "active_set_exact: negative tolerance");
  ActiveSet a;
  for (std::size_t i = 0; i < c_vals.size(); ++i)
    if (c_vals[i] >= -tol) a.push_back(static_cast<int>(i) + 1);
  return a;
}

namespace detail {
inline Vec stationarity(const Evaluation& ev, const MultiplierPair& m) {
  require(static_cast<int>(m.y.size()) == ev.p && static_cast<int>(m.z.size()) == ev.q,
          "multiplier dimensions do not match evaluation");
  Vec g = ev.grad_f;
  if (ev.p > 0) {
    Vec t = ev.jac_e.mul(m.y);
    for (int i = 0; i < ev.n; ++i) g[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i)];
  }
  if (ev.q > 0) {
    Vec t = ev.jac_c.mul(m.z);
    for (int i = 0; i < ev.n; ++i) g[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i)];
  }
  return g;
}
}  // namespace detail

/// KKT error: 1-norm of [stationarity; e; min{z, -c}].
inline double psi(const Evaluation& ev, const MultiplierPair& m) {
  double s = norm1(detail::stationarity(ev, m)) + norm1(ev.e_val);
  for (int i = 0; i < ev.q; ++i)
    s += std::fabs(std::min(m.z[static_cast<std::size_t>(i)], -ev.c_val[static_cast<std::size_t>(i)]));
  return s;
}

/// Stationarity-plus-equality 1-norm.
inline double kappa(const Evaluation& ev, const MultiplierPair& m) {
  return norm1(detail::stationarity(ev, m)) + norm1(ev.e_val);
}

/// rho = kappa + sum_{c_i<0} -c_i z_i + sum_{c_i>=0} c_i.  Requires z >= 0.
inline double rho(const Evaluation& ev, const MultiplierPair& m) {
  for (double zi : m.z)
    if (zi < 0.0) throw std::domain_error("rho: z must be componentwise nonnegative");
  double s = kappa(ev, m);
  for (int i = 0; i < ev.q; ++i) {
    const double ci = ev.c_val[static_cast<std::size_t>(i)];
    if (ci < 0.0)
      s += -ci * m.z[static_cast<std::size_t>(i)];
    else
      s += ci;
  }
  return s;
}

/// rho_bar = kappa + sum_{c_i<0} sqrt(-c_i z_i) + sum_{c_i>=0} c_i.
inline double rho_bar(const Evaluation& ev, const MultiplierPair& m) {
  for (double zi : m.z)
    if (zi < 0.0) throw std::domain_error("rho_bar: z must be componentwise nonnegative");
  double s = kappa(ev, m);
  for (int i = 0; i < ev.q; ++i) {
    const double ci = ev.c_val[static_cast<std::size_t>(i)];
    if (ci < 0.0)
      s += std::sqrt(std::max(0.0, -ci * m.z[static_cast<std::size_t>(i)]));  // roundoff guard
    else
      s += ci;
  }
  return s;
}

struct enumeration_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OmegaResult {
  double value = kInf;
  MultiplierPair argmin;
};

/// Minimizes psi over y free, 0 <= z <= z_cap by enumerating, per index with
/// c_i <= 0, which argument of min{z_i, -c_i} attains the minimum, and solving
/// one LP per pattern.  Indices with c_i > 0 are forced to the -c_i branch.
/// Ties between patterns break toward the lowest pattern index.
inline OmegaResult omega_bruteforce(const Evaluation& ev, double z_cap) {
  require(z_cap > 0.0, "omega_bruteforce: z_cap must be positive");
  const int n = ev.n, p = ev.p, q = ev.q;
  std::vector<int> branchable;  // indices with c_i <= 0
  for (int i = 0; i < q; ++i)
    if (ev.c_val[static_cast<std::size_t>(i)] <= 0.0) branchable.push_back(i);
  if (static_cast<int>(branchable.size()) > 12)
    throw enumeration_limit_error("omega_bruteforce: more than 12 branchable constraints");

  // constant terms shared by every pattern
  const double e_const = norm1(ev.e_val);
  double forced_const = 0.0;
  for (int i = 0; i < q; ++i)
    if (ev.c_val[static_cast<std::size_t>(i)] > 0.0) forced_const += ev.c_val[static_cast<std::size_t>(i)];

  OmegaResult best;
  const std::size_t npat = std::size_t{1} << branchable.size();
  for (std::size_t pat = 0; pat < npat; ++pat) {
    // variables: y(p) free, z(q), r(n) >= 0, s(n) >= 0
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
      lp.lower[static_cast<std::size_t>(p + i)] = 0.0;
      lp.upper[static_cast<std::size_t>(p + i)] = z_cap;
    }
    double pattern_const = e_const + forced_const;
    for (std::size_t k = 0; k < branchable.size(); ++k) {
      const int i = branchable[k];
      const double ci = ev.c_val[static_cast<std::size_t>(i)];
      if (pat & (std::size_t{1} << k)) {
        // min attained by -c_i: require z_i >= -c_i, contribute |c_i| = -c_i
        lp.lower[static_cast<std::size_t>(p + i)] = std::min(-ci, z_cap);
        pattern_const += -ci;
      } else {
        // min attained by z_i: require z_i <= -c_i, contribute z_i
        lp.upper[static_cast<std::size_t>(p + i)] = std::min(-ci, z_cap);
        lp.objective[static_cast<std::size_t>(p + i)] = 1.0;
      }
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
    }
    for (int r = 0; r < 2 * n; ++r)
      lp.objective[static_cast<std::size_t>(p + q + r)] = 1.0;

    LpSolution sol = simplex_solve(lp);
    if (sol.status != LpStatus::Optimal) continue;
    const double value = sol.objective + pattern_const;
    if (value < best.value - 1e-14) {
      best.value = value;
      best.argmin.y.assign(sol.x.begin(), sol.x.begin() + p);
      best.argmin.z.assign(sol.x.begin() + p, sol.x.begin() + p + q);
    }
  }
  return best;
}

}  // namespace activeset
