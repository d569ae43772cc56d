#include "doctest.h"

#include "ocl/errors.hpp"
#include "ocl/linalg.hpp"
#include "test_util.hpp"

using namespace ocl;
using test_util::max_abs_diff;
using test_util::random_spd;

TEST_CASE("kron identity cases") {
  CHECK(max_abs_diff(kron(Matrix::identity(2), Matrix::identity(3)), Matrix::identity(6)) ==
        0.0);

  Rng rng(7);
  const Matrix b = test_util::random_matrix(3, 4, rng);
  const Matrix two{{2.0}};
  CHECK(max_abs_diff(kron(two, b), scaled(b, 2.0)) == 0.0);
}

TEST_CASE("kron matches the hand-expanded definition") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  // Expanded entry by entry from the definition before implementing.
  const Matrix expected{{0, 1, 0, 2},
                        {1, 0, 2, 0},
                        {0, 3, 0, 4},
                        {3, 0, 4, 0}};
  CHECK(max_abs_diff(kron(a, b), expected) == 0.0);
}

TEST_CASE("kron is associative at value level") {
  Rng rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix a = test_util::random_matrix(2, 3, rng);
    const Matrix b = test_util::random_matrix(3, 2, rng);
    const Matrix c = test_util::random_matrix(2, 2, rng);
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);
  }
}

TEST_CASE("invert_spd on identity and diagonal matrices") {
  CHECK(max_abs_diff(invert_spd(Matrix::identity(4)), Matrix::identity(4)) == 0.0);
  const Matrix d{{2, 0}, {0, 4}};
  const Matrix expected{{0.5, 0}, {0, 0.25}};
  CHECK(max_abs_diff(invert_spd(d), expected) < 1e-15);
}

TEST_CASE("invert_spd multiply-back oracle on random SPD matrices") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix m = random_spd(5, rng);
    CHECK(max_abs_diff(matmul(invert_spd(m), m), Matrix::identity(5)) < 1e-8);
  }
}

TEST_CASE("invert_spd rejects non-SPD input") {
  CHECK_THROWS_AS(invert_spd(Matrix{{1, 0}, {0, -1}}), NotPositiveDefinite);
  CHECK_THROWS_AS(invert_spd(Matrix(2, 3)), NotSquare);
  const double nan = std::nan("");
  CHECK_THROWS_AS(invert_spd(Matrix{{nan, 0}, {0, 1}}), NotPositiveDefinite);
}

TEST_CASE("mixed-product inversion identity") {
  // (A kron B)^-1 == A^-1 kron B^-1: the identity the factored update uses.
  Rng rng(11);
  for (std::size_t na : {2, 4, 5}) {
    for (std::size_t nb : {2, 3}) {
      const Matrix a = random_spd(na, rng);
      const Matrix b = random_spd(nb, rng);
      CHECK(max_abs_diff(invert_spd(kron(a, b)), kron(invert_spd(a), invert_spd(b))) < 1e-8);
    }
  }
}

TEST_CASE("trace") {
  CHECK(trace(Matrix::identity(5)) == 5.0);
  CHECK(trace(Matrix{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}) == 6.0);
  Rng rng(5);
  const Matrix m = test_util::random_matrix(4, 4, rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < 4; ++i) expected += m(i, i);
  CHECK(trace(m) == expected);
  CHECK_THROWS_AS(trace(Matrix(2, 3)), NotSquare);
}

TEST_CASE("solve_dense") {
  Rng rng(9);
  const Matrix g = test_util::random_matrix(4, 1, rng);
  CHECK(max_abs_diff(solve_dense(Matrix::identity(4), g), g) == 0.0);
  CHECK(max_abs_diff(solve_dense(scaled(Matrix::identity(4), 2.0), g), scaled(g, 0.5)) <
        1e-15);

  for (int rep = 0; rep < 5; ++rep) {
    const Matrix f = random_spd(6, rng);
    const Matrix rhs = test_util::random_matrix(6, 1, rng);
    const Matrix x = solve_dense(f, rhs);
    CHECK(max_abs_diff(matmul(f, x), rhs) < 1e-8);
    CHECK(max_abs_diff(x, matmul(invert_spd(f), rhs)) < 1e-8);
  }
}

TEST_CASE("matmul helpers agree with explicit transposes") {
  Rng rng(13);
  const Matrix a = test_util::random_matrix(4, 3, rng);
  const Matrix b = test_util::random_matrix(4, 5, rng);
  CHECK(max_abs_diff(matmul_at_b(a, b), matmul(transpose(a), b)) < 1e-14);
  const Matrix c = test_util::random_matrix(5, 3, rng);
  CHECK(max_abs_diff(matmul_a_bt(a, c), matmul(a, transpose(c))) < 1e-14);
}
