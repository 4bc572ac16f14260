#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrno/objectives.hpp"
#include "lrno/rng.hpp"

using namespace lrno;

namespace {

std::shared_ptr<const MeasurementOperator> random_operator(Index n, Index m, std::uint64_t seed) {
  Rng rng(seed, "op");
  std::vector<SymMatrix> mats;
  for (Index i = 0; i < m; ++i) mats.emplace_back(rng.normal_matrix(n, n));
  return std::make_shared<MeasurementOperator>(mats);
}

ObjectivePtr sensing(Index n, std::uint64_t seed) {
  auto op = random_operator(n, 3 * n, seed);
  Rng rng(seed, "b");
  Vector b(op->m());
  for (Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
  return sensing_objective(op, b);
}

ObjectivePtr one_bit(Index n, std::uint64_t seed) {
  Rng rng(seed, "y");
  Matrix y(n, n), w(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) y(i, j) = rng.uniform();
  }
  y = (0.5 * (y + y.transpose())).eval();
  w = 0.05 * rng.normal_matrix(n, n);
  return one_bit_objective(y, w);
}

ObjectivePtr lift(Index n, Index m, std::uint64_t seed) {
  Rng rng(seed, "lift");
  std::vector<Matrix> mats;
  for (int i = 0; i < 10; ++i) mats.push_back(rng.normal_matrix(n, m));
  Vector b(10);
  for (Index i = 0; i < 10; ++i) b(i) = rng.normal();
  return asymmetric_lift(std::make_shared<RectSensingObjective>(mats, b), 0.7);
}

double fd_grad_error(const Objective& obj, const Factor& x) {
  const Factor g = factored_grad(obj, x);
  Factor fd(x.rows(), x.cols());
  const double h = 1e-6;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      Factor xp = x, xm = x;
      xp(i, j) += h;
      xm(i, j) -= h;
      fd(i, j) = (factored_value(obj, xp) - factored_value(obj, xm)) / (2 * h);
    }
  }
  return (g - fd).norm() / std::max(1.0, g.norm());
}

double fd_hess_error(const Objective& obj, const Factor& x, const Factor& u) {
  const double h = 1e-4;
  const double fd =
      (factored_value(obj, x + h * u) - 2 * factored_value(obj, x) + factored_value(obj, x - h * u)) / (h * h);
  const double an = factored_hess_form(obj, x, u);
  return std::abs(an - fd) / std::max(1.0, std::abs(an));
}

}  // namespace

TEST_CASE("measurement operator apply and adjoint are transposes") {
  auto op = random_operator(4, 7, 1);
  Rng rng(2, "t");
  const SymMatrix m(rng.normal_matrix(4, 4));
  Vector y(7);
  for (Index i = 0; i < 7; ++i) y(i) = rng.normal();
  CHECK(op->apply(m.mat()).dot(y) == doctest::Approx(inner(m.mat(), op->adjoint(y).mat())).epsilon(1e-12));
  for (Index i = 0; i < 7; ++i) {
    CHECK(op->apply(m.mat())(i) == doctest::Approx(inner(op->sensing_matrix(i).mat(), m.mat())).epsilon(1e-12));
  }
}

TEST_CASE("zeta1 matches the largest singular value") {
  auto op = random_operator(3, 5, 4);
  Eigen::JacobiSVD<Matrix> svd(op->stacked());
  CHECK(op->zeta1() == doctest::Approx(svd.singularValues()(0)).epsilon(1e-8));
  CHECK(op->rho() == doctest::Approx(op->zeta1() * op->zeta1()));
}

TEST_CASE("factored gradients match finite differences") {
  Rng rng(5, "x");
  for (int t = 0; t < 5; ++t) {
    CHECK(fd_grad_error(*sensing(4, t), rng.normal_matrix(4, 2)) <= 1e-6);
    CHECK(fd_grad_error(*one_bit(4, t), rng.normal_matrix(4, 2)) <= 1e-6);
    CHECK(fd_grad_error(*lift(3, 2, t), rng.normal_matrix(5, 2)) <= 1e-6);
  }
}

TEST_CASE("factored Hessian forms match finite differences") {
  Rng rng(6, "x");
  for (int t = 0; t < 5; ++t) {
    CHECK(fd_hess_error(*sensing(4, t), rng.normal_matrix(4, 2), rng.normal_matrix(4, 2)) <= 1e-5);
    CHECK(fd_hess_error(*one_bit(4, t), rng.normal_matrix(4, 2), rng.normal_matrix(4, 2)) <= 1e-5);
    CHECK(fd_hess_error(*lift(3, 2, t), rng.normal_matrix(5, 2), rng.normal_matrix(5, 2)) <= 1e-5);
  }
}

TEST_CASE("dense factored Hessian is symmetric and reproduces the form") {
  Rng rng(7, "x");
  for (const ObjectivePtr& obj : {sensing(4, 1), one_bit(4, 1)}) {
    const Factor x = rng.normal_matrix(4, 2);
    const Matrix h = factored_hessian(*obj, x);
    CHECK((h - h.transpose()).norm() <= 1e-12 * std::max(1.0, h.norm()));
    const Factor u = rng.normal_matrix(4, 2);
    const Vector v = vec(u);
    CHECK(v.dot(h * v) == doctest::Approx(factored_hess_form(*obj, x, u)).epsilon(1e-10));
  }
}

TEST_CASE("one-bit value matches the elementwise formula") {
  Matrix y(2, 2), w(2, 2);
  y << 0.2, 0.7, 0.7, 1.0;
  w << 0.01, -0.02, -0.02, 0.0;
  const auto obj = one_bit_objective(y, w);
  Matrix m(2, 2);
  m << 0.5, -1.0, -1.0, 2.0;
  double want = 0.0;
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) want -= (y(i, j) + w(i, j)) * m(i, j) - std::log(1 + std::exp(m(i, j)));
  }
  CHECK(obj->value(SymMatrix(m)) == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(one_bit_objective(Matrix::Constant(2, 2, 1.5), w), DomainError);
}

TEST_CASE("softplus is overflow free") {
  CHECK(softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(softplus(-1000.0) >= 0.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("asymmetric lift equals g(U V^T) plus the balancing term") {
  Rng rng(8, "asym");
  std::vector<Matrix> mats;
  for (int i = 0; i < 6; ++i) mats.push_back(rng.normal_matrix(3, 2));
  Vector b(6);
  for (Index i = 0; i < 6; ++i) b(i) = rng.normal();
  auto inner_obj = std::make_shared<RectSensingObjective>(mats, b);
  const double phi = 0.9;
  const auto obj = asymmetric_lift(inner_obj, phi);
  const Matrix u = rng.normal_matrix(3, 2);
  const Matrix v = rng.normal_matrix(2, 2);
  Factor x(5, 2);
  x << u, v;
  const Matrix bal = u.transpose() * u - v.transpose() * v;
  const double want = inner_obj->value(u * v.transpose()) + phi / 4 * bal.squaredNorm();
  CHECK(factored_value(*obj, x) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("noise gradient deviation of sensing is |<A^T w, K>|") {
  auto op = random_operator(3, 6, 9);
  Rng rng(9, "w");
  Vector b(6), w(6);
  for (Index i = 0; i < 6; ++i) {
    b(i) = rng.normal();
    w(i) = 0.1 * rng.normal();
  }
  const auto clean = sensing_objective(op, b);
  const auto noisy = sensing_objective(op, b + w);
  const SymMatrix m(rng.normal_matrix(3, 3));
  const Matrix k = SymMatrix(rng.normal_matrix(3, 3)).mat();
  const double want = std::abs(inner(op->adjoint(w).mat(), k));
  CHECK(noise_gradient_deviation(*noisy, *clean, m, k) == doctest::Approx(want).epsilon(1e-12));
}
