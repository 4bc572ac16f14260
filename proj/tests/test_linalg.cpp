#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrno/linalg.hpp"
#include "lrno/rng.hpp"

using namespace lrno;

namespace {

SymMatrix random_sym(Index n, std::uint64_t seed) {
  Rng rng(seed, "test_sym");
  return SymMatrix(rng.normal_matrix(n, n));
}

Matrix rotation2(double t) {
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

}  // namespace

TEST_CASE("SymMatrix symmetrizes and rejects bad input") {
  Matrix a(2, 2);
  a << 1, 2, 4, 3;
  const SymMatrix s(a);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
  CHECK_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), ShapeError);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{a}, DomainError);
}

TEST_CASE("eigh reconstructs with descending values and sign convention") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SymMatrix m = random_sym(6, seed);
    const Spectrum s = eigh(m);
    const Matrix back = s.vectors * s.values.asDiagonal() * s.vectors.transpose();
    CHECK((back - m.mat()).norm() <= 1e-10);
    CHECK((s.vectors.transpose() * s.vectors - Matrix::Identity(6, 6)).norm() <= 1e-10);
    for (Index i = 1; i < 6; ++i) CHECK(s.values(i - 1) >= s.values(i));
    for (Index c = 0; c < 6; ++c) {
      Index arg = 0;
      s.vectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(s.vectors(arg, c) >= 0.0);
    }
  }
}

TEST_CASE("eigh is bitwise deterministic") {
  const SymMatrix m = random_sym(7, 3);
  const Spectrum a = eigh(m);
  const Spectrum b = eigh(m);
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("project_psd_rank_r on a diagonal example") {
  Matrix d = Vector{{3.0, -1.0, 2.0}}.asDiagonal();
  const SymMatrix p1 = project_psd_rank_r(SymMatrix(d), 1);
  Matrix want = Matrix::Zero(3, 3);
  want(0, 0) = 3.0;
  CHECK((p1.mat() - want).norm() <= 1e-12);
  const SymMatrix p3 = project_psd_rank_r(SymMatrix(d), 3);
  want(2, 2) = 2.0;
  CHECK((p3.mat() - want).norm() <= 1e-12);
  CHECK_THROWS_AS(project_psd_rank_r(SymMatrix(d), 0), DomainError);
  CHECK_THROWS_AS(project_psd_rank_r(SymMatrix(d), 4), DomainError);
}

TEST_CASE("project_psd_rank_r beats random rank-r PSD candidates") {
  Rng rng(11, "candidates");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SymMatrix m = random_sym(5, 100 + seed);
    const double best = (project_psd_rank_r(m, 2) - m).frobenius();
    for (int k = 0; k < 200; ++k) {
      const SymMatrix cand = SymMatrix::gram(rng.normal_matrix(5, 2));
      CHECK((cand - m).frobenius() >= best - 1e-12);
    }
  }
}

TEST_CASE("numerical_rank and psd_factor") {
  Rng rng(5, "factor");
  const Factor x = rng.normal_matrix(6, 3);
  const SymMatrix m = SymMatrix::gram(x);
  CHECK(numerical_rank(eigh(m)) == 3);
  const Factor z = psd_factor(m, 3);
  CHECK((SymMatrix::gram(z) - m).frobenius() <= 1e-10);
  CHECK(numerical_rank(eigh(SymMatrix::zeros(4))) == 0);
}

TEST_CASE("dist_factor is zero on rotated factors") {
  Rng rng(7, "dist");
  const Factor z = rng.normal_matrix(5, 2);
  const SymMatrix m = SymMatrix::gram(z);
  CHECK(dist_factor(z * rotation2(0.7), m) <= 1e-10);
  CHECK(dist_factor(z * rotation2(-2.1), m) <= 1e-10);
}

TEST_CASE("dist_factor matches brute-force orthogonal search") {
  Rng rng(8, "dist_bf");
  for (int trial = 0; trial < 5; ++trial) {
    const Factor z = rng.normal_matrix(4, 2);
    const Factor x = rng.normal_matrix(4, 2);
    const SymMatrix m = SymMatrix::gram(z);
    // Every factor of M is Z R with R in O(2): rotations and reflections.
    double best = 1e300;
    Matrix flip = Matrix::Identity(2, 2);
    flip(1, 1) = -1.0;
    for (int k = 0; k < 20000; ++k) {
      const double t = 2.0 * M_PI * k / 20000.0;
      best = std::min(best, (x - z * rotation2(t)).norm());
      best = std::min(best, (x - z * rotation2(t) * flip).norm());
    }
    const double d = dist_factor(x, m);
    CHECK(d <= best + 1e-12);
    CHECK(d >= best - 1e-3);
  }
}

TEST_CASE("dist_factor requires matching rank") {
  Rng rng(9, "rank");
  const SymMatrix m = SymMatrix::gram(rng.normal_matrix(4, 1));
  CHECK_THROWS_AS(dist_factor(rng.normal_matrix(4, 2), m), DomainError);
}

TEST_CASE("lifted_matrix agrees with lifted_apply") {
  Rng rng(10, "lift");
  const Factor x = rng.normal_matrix(4, 3);
  const Factor u = rng.normal_matrix(4, 3);
  const Matrix l = lifted_matrix(x);
  CHECK(l.rows() == 16);
  CHECK(l.cols() == 12);
  CHECK((l * vec(u) - vec(lifted_apply(x, u).mat())).norm() <= 1e-12);
}

TEST_CASE("vec and unvec are column-major inverses") {
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const Vector v = vec(a);
  CHECK(v(1) == 4.0);
  CHECK(unvec(v, 2, 3) == a);
}

TEST_CASE("sym_basis is orthonormal and spans symmetric matrices") {
  const Matrix b = sym_basis(4);
  CHECK(b.cols() == 10);
  CHECK((b.transpose() * b - Matrix::Identity(10, 10)).norm() <= 1e-12);
  const SymMatrix s = random_sym(4, 12);
  const Vector v = vec(s.mat());
  CHECK((b * (b.transpose() * v) - v).norm() <= 1e-12);
}

TEST_CASE("spectral_norm of a diagonal matrix") {
  Matrix d = Matrix::Zero(3, 2);
  d(0, 0) = -4.0;
  d(1, 1) = 2.0;
  CHECK(spectral_norm(d) == doctest::Approx(4.0).epsilon(1e-14));
}
