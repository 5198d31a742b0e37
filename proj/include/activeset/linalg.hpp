// Dense linear algebra for desk-scale KKT systems: vectors, row-major
// matrices, LU with partial pivoting, and the perturbed-system bound checker.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace activeset {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  /// A * x
  Vec mul(const Vec& x) const {
    require(x.size() == cols_, "Matrix::mul: dimension mismatch");
    Vec y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += a_[i * cols_ + j] * x[j];
      y[i] = s;
    }
    return y;
  }

  /// A^T * x
  Vec tmul(const Vec& x) const {
    require(x.size() == rows_, "Matrix::tmul: dimension mismatch");
    Vec y(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[j] += a_[i * cols_ + j] * x[i];
    return y;
  }

  Vec col(std::size_t j) const {
    Vec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = a_[i * cols_ + j];
    return c;
  }

  /// Max absolute row sum (infinity-induced operator norm).
  double norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += std::fabs(a_[i * cols_ + j]);
      m = std::max(m, s);
    }
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::fabs(x));
    return m;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

inline double norm1(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

inline double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline double dot(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct singular_matrix_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Packed LU factors with partial pivoting.  Pivot magnitude below
/// 1e-12 * max|a_ij| marks the factorization singular.
struct LuFactorization {
  Matrix lu;              // L below diagonal (unit), U on/above
  std::vector<int> perm;  // row permutation: row i of PA is row perm[i] of A
  bool singular = false;
};

inline LuFactorization lu_factor(Matrix a) {
  require(a.rows() == a.cols(), "lu_factor: matrix must be square");
  const std::size_t n = a.rows();
  LuFactorization f;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = static_cast<int>(i);
  const double pivot_floor = 1e-12 * a.max_abs();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a(i, k)) > best) {
        best = std::fabs(a(i, k));
        piv = i;
      }
    }
    if (best <= pivot_floor) {
      f.singular = true;
      f.lu = std::move(a);
      return f;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      const double lik = a(i, k);
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

inline Vec lu_solve(const LuFactorization& f, const Vec& b) {
  if (f.singular) throw singular_matrix_error("lu_solve: singular system");
  const std::size_t n = f.lu.rows();
  require(b.size() == n, "lu_solve: rhs length mismatch");
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[static_cast<std::size_t>(f.perm[i])];
  // forward: L y = Pb
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  // back: U x = y
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= f.lu(ii, j) * x[j];
    x[ii] /= f.lu(ii, ii);
  }
  return x;
}

inline Matrix inverse(const Matrix& a) {
  const std::size_t n = a.rows();
  auto f = lu_factor(a);
  Matrix inv(n, n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec c = lu_solve(f, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = c[i];
  }
  return inv;
}

/// cond(K) = ||K||_inf * ||K^-1||_inf, with the inverse formed explicitly.
inline double cond_inf(const Matrix& k) {
  return k.norm_inf() * inverse(k).norm_inf();
}

/// Checks the perturbed-linear-system relative error bound
///   ||v - vt|| / ||v|| <= cond(K)/(1 - ||dK|| ||K^-1||) (||dK||/||K|| + ||db||/||b||)
/// where K v = b and (K+dK) vt = b+db, all in the inf-induced norm.
/// Requires K nonsingular, b != 0, and ||dK|| ||K^-1|| < 1.
inline bool perturbation_bound_holds(const Matrix& k, const Matrix& dk,
                                     const Vec& b, const Vec& db) {
  require(k.rows() == k.cols() && dk.rows() == k.rows() && dk.cols() == k.cols(),
          "perturbation_bound_holds: shape mismatch");
  require(b.size() == k.rows() && db.size() == b.size(),
          "perturbation_bound_holds: rhs length mismatch");
  if (norm_inf(b) == 0.0)
    throw std::domain_error("perturbation_bound_holds: b must be nonzero");
  auto fk = lu_factor(k);
  if (fk.singular)
    throw std::domain_error("perturbation_bound_holds: K is singular");
  const Matrix kinv = inverse(k);
  const double contraction = dk.norm_inf() * kinv.norm_inf();
  if (contraction >= 1.0)
    throw std::domain_error("perturbation_bound_holds: ||dK|| ||K^-1|| >= 1");

  const std::size_t n = k.rows();
  Matrix kt(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) kt(i, j) = k(i, j) + dk(i, j);
  Vec bt(n);
  for (std::size_t i = 0; i < n; ++i) bt[i] = b[i] + db[i];

  const Vec v = lu_solve(fk, b);
  const Vec vt = lu_solve(lu_factor(kt), bt);
  Vec diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = v[i] - vt[i];

  const double lhs = norm_inf(diff) / norm_inf(v);
  const double rhs = (k.norm_inf() * kinv.norm_inf()) / (1.0 - contraction) *
                     (dk.norm_inf() / k.norm_inf() + norm_inf(db) / norm_inf(b));
  return lhs <= rhs * (1.0 + 1e-12) + 1e-300;
}

}  // namespace activeset
