#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "lrno/linalg.hpp"

namespace lrno {

// Linear map A(M) = [<A_1,M>, ..., <A_m,M>] stored as the stacked m x n^2
// matrix whose i-th row is vec(A_i)^T.
class MeasurementOperator {
 public:
  MeasurementOperator() = default;
  explicit MeasurementOperator(const std::vector<SymMatrix>& mats);
  // Rows of `stacked` must reshape (column-major) into symmetric matrices;
  // they are symmetrized on entry.
  MeasurementOperator(const Matrix& stacked, Index n);

  Index n() const { return n_; }
  Index m() const { return stacked_.rows(); }
  const Matrix& stacked() const { return stacked_; }
  SymMatrix sensing_matrix(Index i) const;

  Vector apply(const Matrix& m) const;          // A(M)
  SymMatrix adjoint(const Vector& y) const;     // mat(A^T y)

  // ||A||_2, by power iteration on A^T A.
  double zeta1() const { return zeta1_; }
  // sigma_max(A A^T) = zeta1^2.
  double rho() const { return zeta1_ * zeta1_; }

 private:
  void finish();

  Index n_ = 0;
  Matrix stacked_;
  double zeta1_ = 0.0;
};

// Top eigenvalue of A^T A by power iteration (50 iterations or relative
// change below 1e-10), returned as sqrt, i.e. ||A||_2.
double operator_norm_power(const Matrix& stacked);

enum class ObjectiveKind { sensing, one_bit, asymmetric_lift };

const char* to_string(ObjectiveKind kind);

// f(M, w) on symmetric n x n arguments. The gradient is the symmetric
// representative, so <grad, K> is the directional derivative for symmetric K.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual ObjectiveKind kind() const = 0;
  virtual Index dim() const = 0;
  virtual double value(const SymMatrix& m) const = 0;
  virtual SymMatrix gradient(const SymMatrix& m) const = 0;
  // Shares work between the two where the objective can.
  virtual std::pair<double, SymMatrix> value_and_gradient(const SymMatrix& m) const {
    return {value(m), gradient(m)};
  }
  // [nabla^2 f(M)](K, L)
  virtual double hess_form(const SymMatrix& m, const Matrix& k, const Matrix& l) const = 0;
  // Gram matrix G_ab = [nabla^2 f(M)](D_a, D_b). The default evaluates every
  // pair; quadratic objectives override it with one image per direction.
  virtual Matrix hess_gram(const SymMatrix& m, const std::vector<Matrix>& dirs) const;

  virtual double zeta1() const = 0;
  virtual double zeta2() const = 0;
  virtual std::optional<double> rho() const { return std::nullopt; }
};

using ObjectivePtr = std::shared_ptr<const Objective>;

// 1/2 ||A(M) - b||^2
class SensingObjective final : public Objective {
 public:
  SensingObjective(std::shared_ptr<const MeasurementOperator> op, Vector b_tilde);

  ObjectiveKind kind() const override { return ObjectiveKind::sensing; }
  Index dim() const override { return op_->n(); }
  double value(const SymMatrix& m) const override;
  SymMatrix gradient(const SymMatrix& m) const override;
  std::pair<double, SymMatrix> value_and_gradient(const SymMatrix& m) const override;
  double hess_form(const SymMatrix& m, const Matrix& k, const Matrix& l) const override;
  Matrix hess_gram(const SymMatrix& m, const std::vector<Matrix>& dirs) const override;
  double zeta1() const override { return op_->zeta1(); }
  double zeta2() const override { return 0.0; }
  std::optional<double> rho() const override { return op_->rho(); }

  const MeasurementOperator& op() const { return *op_; }
  const Vector& b_tilde() const { return b_; }

 private:
  std::shared_ptr<const MeasurementOperator> op_;
  Vector b_;
};

// -sum_ij ((y_ij + w_ij) M_ij - log(1 + exp(M_ij)))
class OneBitObjective final : public Objective {
 public:
  OneBitObjective(Matrix y, Matrix w);

  ObjectiveKind kind() const override { return ObjectiveKind::one_bit; }
  Index dim() const override { return y_.rows(); }
  double value(const SymMatrix& m) const override;
  SymMatrix gradient(const SymMatrix& m) const override;
  double hess_form(const SymMatrix& m, const Matrix& k, const Matrix& l) const override;
  double zeta1() const override { return 1.0; }
  double zeta2() const override { return 0.0; }
  // sigmoid' <= 1/4
  std::optional<double> rho() const override { return 0.25; }

 private:
  Matrix y_;
  Matrix w_;
};

// Overflow-free log(1 + exp(x)).
double softplus(double x);
double sigmoid(double x);

// Objective on general rows x cols matrices, the inner function of the
// asymmetric lift.
class RectObjective {
 public:
  virtual ~RectObjective() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual double value(const Matrix& m) const = 0;
  virtual Matrix gradient(const Matrix& m) const = 0;
  virtual double hess_form(const Matrix& m, const Matrix& k, const Matrix& l) const = 0;
  virtual double zeta1() const = 0;
  virtual double zeta2() const = 0;
};

using RectObjectivePtr = std::shared_ptr<const RectObjective>;

// 1/2 sum_i (<A_i, M> - b_i)^2 with general n x m sensing matrices.
class RectSensingObjective final : public RectObjective {
 public:
  RectSensingObjective(std::vector<Matrix> mats, Vector b_tilde);
  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  double value(const Matrix& m) const override;
  Matrix gradient(const Matrix& m) const override;
  double hess_form(const Matrix& m, const Matrix& k, const Matrix& l) const override;
  double zeta1() const override { return zeta1_; }
  double zeta2() const override { return 0.0; }

 private:
  Index rows_;
  Index cols_;
  Matrix stacked_;
  Vector b_;
  double zeta1_;
};

// 1-bit completion loss on an n x m observation grid.
class RectOneBitObjective final : public RectObjective {
 public:
  RectOneBitObjective(Matrix y, Matrix w);
  Index rows() const override { return y_.rows(); }
  Index cols() const override { return y_.cols(); }
  double value(const Matrix& m) const override;
  Matrix gradient(const Matrix& m) const override;
  double hess_form(const Matrix& m, const Matrix& k, const Matrix& l) const override;
  double zeta1() const override { return 1.0; }
  double zeta2() const override { return 0.0; }

 private:
  Matrix y_;
  Matrix w_;
};

// Symmetric reformulation of min_{U,V} g(U V^T) + phi/4 ||U^T U - V^T V||_F^2
// over X = [U; V]. With P = X X^T partitioned into blocks P11 (n x n),
// P12 (n x m), P21 (m x n), P22 (m x m):
//   f_a(P) = (g(P12) + g(P21^T)) / 2
//            + phi/4 (||P11||^2 + ||P22||^2 - ||P12||^2 - ||P21||^2),
// so f_a(X X^T) = g(U V^T) + phi/4 ||U^T U - V^T V||^2 exactly.
class AsymmetricLift final : public Objective {
 public:
  AsymmetricLift(RectObjectivePtr inner, double phi);

  ObjectiveKind kind() const override { return ObjectiveKind::asymmetric_lift; }
  Index dim() const override { return n_ + m_; }
  double value(const SymMatrix& p) const override;
  SymMatrix gradient(const SymMatrix& p) const override;
  double hess_form(const SymMatrix& p, const Matrix& k, const Matrix& l) const override;
  double zeta1() const override { return inner_->zeta1(); }
  double zeta2() const override { return inner_->zeta2(); }

  double phi() const { return phi_; }
  const RectObjective& inner() const { return *inner_; }

 private:
  RectObjectivePtr inner_;
  double phi_;
  Index n_;
  Index m_;
};

std::shared_ptr<SensingObjective> sensing_objective(std::shared_ptr<const MeasurementOperator> op,
                                                    Vector b_tilde);
std::shared_ptr<OneBitObjective> one_bit_objective(Matrix y, Matrix w);
std::shared_ptr<AsymmetricLift> asymmetric_lift(RectObjectivePtr inner, double phi);

// h(X) = f(X X^T)
double factored_value(const Objective& obj, const Factor& x);
// nabla_X h = 2 nabla_M f(X X^T) X
Factor factored_grad(const Objective& obj, const Factor& x);
// 2 <nabla f, U U^T> + [nabla^2 f](X U^T + U X^T, X U^T + U X^T)
double factored_hess_form(const Objective& obj, const Factor& x, const Factor& u);
// Dense nr x nr Hessian of h at X in the column-major vec(U) basis.
Matrix factored_hessian(const Objective& obj, const Factor& x);

// |<nabla f(M, w) - nabla f(M, 0), K>|
double noise_gradient_deviation(const Objective& noisy, const Objective& clean,
                                const SymMatrix& m, const Matrix& k);

}  // namespace lrno
