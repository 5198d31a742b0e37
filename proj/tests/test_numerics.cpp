#include <doctest.h>

#include "activeset/linalg.hpp"
#include "activeset/selfcheck.hpp"

using namespace activeset;

TEST_CASE("lu_factor identity has trivial factors") {
  Matrix a = Matrix::identity(3);
  auto f = lu_factor(a);
  REQUIRE_FALSE(f.singular);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(f.perm[i] == static_cast<int>(i));
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(f.lu(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("lu_factor permutation matrix swaps rows and stays nonsingular") {
  Matrix a(2, 2);
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  auto f = lu_factor(a);
  REQUIRE_FALSE(f.singular);
  CHECK(f.perm[0] == 1);
  CHECK(f.perm[1] == 0);
  Vec x = lu_solve(f, Vec{3.0, 7.0});
  CHECK(x[0] == doctest::Approx(7.0));
  CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("lu_factor rejects non-square input") {
  CHECK_THROWS_AS(lu_factor(Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("lu_factor flags a singular matrix") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 4.0;
  auto f = lu_factor(a);
  CHECK(f.singular);
  CHECK_THROWS_AS(lu_solve(f, Vec{1.0, 1.0}), singular_matrix_error);
}

TEST_CASE("lu reconstruction within 1e-12 * norm on random matrices") {
  CheckResult r = check::lu_reconstruction(200, 11);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("solve on identity returns its input exactly") {
  auto f = lu_factor(Matrix::identity(4));
  Vec b{1.5, -2.0, 0.0, 7.25};
  Vec x = lu_solve(f, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == b[i]);
}

TEST_CASE("solve diag(2,4) x = (2,8) gives (1,2)") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 4.0;
  Vec x = lu_solve(lu_factor(a), Vec{2.0, 8.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("solve residual bound on random well-conditioned 6x6") {
  SplitMix64 g(99);
  for (int t = 0; t < 20; ++t) {
    Matrix a = check::random_matrix(g, 6, 6, 2.0);
    for (int i = 0; i < 6; ++i) a(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) += 4.0;
    Vec b = check::random_vec(g, 6, 2.0);
    Vec x = lu_solve(lu_factor(a), b);
    Vec ax = a.mul(x);
    double r = 0.0;
    for (std::size_t i = 0; i < 6; ++i) r = std::max(r, std::fabs(ax[i] - b[i]));
    CHECK(r <= 1e-10 * (a.norm_inf() * norm_inf(x) + norm_inf(b)));
  }
}

TEST_CASE("perturbation bound: zero perturbation is trivially true") {
  Matrix k = Matrix::identity(3);
  Matrix dk(3, 3);
  Vec b{1.0, 2.0, 3.0};
  Vec db(3, 0.0);
  CHECK(perturbation_bound_holds(k, dk, b, db));
}

TEST_CASE("perturbation bound: identity K with rhs shift hits the boundary") {
  Matrix k = Matrix::identity(2);
  Matrix dk(2, 2);
  CHECK(perturbation_bound_holds(k, dk, Vec{1.0, 0.0}, Vec{0.1, 0.0}));
}

TEST_CASE("perturbation bound preconditions raise domain errors") {
  Matrix k = Matrix::identity(2);
  Matrix dk(2, 2);
  CHECK_THROWS_AS(perturbation_bound_holds(k, dk, Vec{0.0, 0.0}, Vec{0.0, 0.0}),
                  std::domain_error);
  Matrix big(2, 2);
  big(0, 0) = big(1, 1) = 2.0;  // ||dK|| ||K^-1|| = 2 >= 1
  CHECK_THROWS_AS(perturbation_bound_holds(k, big, Vec{1.0, 0.0}, Vec{0.0, 0.0}),
                  std::domain_error);
  Matrix sing(2, 2);
  sing(0, 0) = 1.0;  // rank 1
  CHECK_THROWS_AS(perturbation_bound_holds(sing, dk, Vec{1.0, 0.0}, Vec{0.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("perturbation bound holds on 200 random conforming instances") {
  CheckResult r = check::perturbation_bound(200, 12);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("cond_inf of identity is 1") {
  CHECK(cond_inf(Matrix::identity(5)) == doctest::Approx(1.0));
}
