#include "lrno/objectives.hpp"

#include <cmath>
#include <sstream>

namespace lrno {

namespace {

void require_dim(const char* what, Index got, Index want) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": dimension " << got << " does not match " << want;
    throw ShapeError(os.str());
  }
}

void require_shape(const char* what, const Matrix& a, Index rows, Index cols) {
  if (a.rows() != rows || a.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << ", got " << a.rows() << "x" << a.cols();
    throw ShapeError(os.str());
  }
}

}  // namespace

double operator_norm_power(const Matrix& stacked) {
  if (stacked.size() == 0) return 0.0;
  Vector v = Vector::Ones(stacked.cols()) / std::sqrt(static_cast<double>(stacked.cols()));
  // Ones can be orthogonal to the top eigenvector; mix in a fixed ramp.
  for (Index i = 0; i < v.size(); ++i) v(i) += 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector w = stacked.transpose() * (stacked * v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const bool done = it > 0 && std::abs(next - lambda) <= 1e-10 * std::abs(next);
    lambda = next;
    if (done) break;
  }
  // Rayleigh quotient of the final iterate.
  lambda = (stacked * v).squaredNorm();
  return std::sqrt(lambda);
}

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::sensing:
      return "sensing";
    case ObjectiveKind::one_bit:
      return "one-bit";
    case ObjectiveKind::asymmetric_lift:
      return "asymmetric-lift";
  }
  return "unknown";
}

// ---------------------------------------------------------------- operator

MeasurementOperator::MeasurementOperator(const std::vector<SymMatrix>& mats) {
  if (mats.empty()) throw DomainError("MeasurementOperator needs at least one sensing matrix");
  n_ = mats.front().n();
  stacked_.resize(static_cast<Index>(mats.size()), n_ * n_);
  for (std::size_t i = 0; i < mats.size(); ++i) {
    require_dim("MeasurementOperator", mats[i].n(), n_);
    stacked_.row(static_cast<Index>(i)) = vec(mats[i].mat()).transpose();
  }
  finish();
}

MeasurementOperator::MeasurementOperator(const Matrix& stacked, Index n) : n_(n) {
  require_dim("MeasurementOperator columns", stacked.cols(), n * n);
  stacked_.resize(stacked.rows(), n * n);
  for (Index i = 0; i < stacked.rows(); ++i) {
    const Matrix a = unvec(stacked.row(i).transpose(), n, n);
    stacked_.row(i) = vec(SymMatrix(a).mat()).transpose();
  }
  finish();
}

void MeasurementOperator::finish() { zeta1_ = operator_norm_power(stacked_); }

SymMatrix MeasurementOperator::sensing_matrix(Index i) const {
  return SymMatrix(unvec(stacked_.row(i).transpose(), n_, n_));
}

Vector MeasurementOperator::apply(const Matrix& m) const {
  require_shape("MeasurementOperator::apply", m, n_, n_);
  return stacked_ * vec(m);
}

SymMatrix MeasurementOperator::adjoint(const Vector& y) const {
  require_dim("MeasurementOperator::adjoint", y.size(), m());
  return SymMatrix(unvec(stacked_.transpose() * y, n_, n_));
}

// ---------------------------------------------------------------- objective

Matrix Objective::hess_gram(const SymMatrix& m, const std::vector<Matrix>& dirs) const {
  const Index k = static_cast<Index>(dirs.size());
  Matrix g(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = a; b < k; ++b) {
      g(a, b) = hess_form(m, dirs[a], dirs[b]);
      g(b, a) = g(a, b);
    }
  }
  return g;
}

SensingObjective::SensingObjective(std::shared_ptr<const MeasurementOperator> op, Vector b_tilde)
    : op_(std::move(op)), b_(std::move(b_tilde)) {
  require_dim("sensing_objective observations", b_.size(), op_->m());
}

double SensingObjective::value(const SymMatrix& m) const {
  return 0.5 * (op_->apply(m.mat()) - b_).squaredNorm();
}

SymMatrix SensingObjective::gradient(const SymMatrix& m) const {
  return op_->adjoint(op_->apply(m.mat()) - b_);
}

std::pair<double, SymMatrix> SensingObjective::value_and_gradient(const SymMatrix& m) const {
  const Vector residual = op_->apply(m.mat()) - b_;
  return {0.5 * residual.squaredNorm(), op_->adjoint(residual)};
}

double SensingObjective::hess_form(const SymMatrix& m, const Matrix& k, const Matrix& l) const {
  require_dim("hess_form", m.n(), op_->n());
  return op_->apply(k).dot(op_->apply(l));
}

Matrix SensingObjective::hess_gram(const SymMatrix& m, const std::vector<Matrix>& dirs) const {
  require_dim("hess_gram", m.n(), op_->n());
  Matrix images(op_->m(), static_cast<Index>(dirs.size()));
  for (std::size_t a = 0; a < dirs.size(); ++a) images.col(static_cast<Index>(a)) = op_->apply(dirs[a]);
  return images.transpose() * images;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

OneBitObjective::OneBitObjective(Matrix y, Matrix w) : y_(std::move(y)), w_(std::move(w)) {
  require_shape("one_bit_objective noise", w_, y_.rows(), y_.cols());
  if (y_.rows() != y_.cols()) throw ShapeError("one_bit_objective: observation grid must be square");
  if ((y_.array() < 0.0).any() || (y_.array() > 1.0).any()) {
    throw DomainError("one_bit_objective: observations must lie in [0, 1]");
  }
}

double OneBitObjective::value(const SymMatrix& m) const {
  require_dim("one_bit value", m.n(), y_.rows());
  double total = 0.0;
  for (Index j = 0; j < m.n(); ++j) {
    for (Index i = 0; i < m.n(); ++i) {
      const double x = m(i, j);
      total -= (y_(i, j) + w_(i, j)) * x - softplus(x);
    }
  }
  return total;
}

SymMatrix OneBitObjective::gradient(const SymMatrix& m) const {
  require_dim("one_bit gradient", m.n(), y_.rows());
  Matrix g = m.mat().unaryExpr([](double x) { return sigmoid(x); }) - (y_ + w_);
  return SymMatrix(g);
}

double OneBitObjective::hess_form(const SymMatrix& m, const Matrix& k, const Matrix& l) const {
  require_dim("one_bit hess_form", m.n(), y_.rows());
  double total = 0.0;
  for (Index j = 0; j < m.n(); ++j) {
    for (Index i = 0; i < m.n(); ++i) {
      const double s = sigmoid(m(i, j));
      total += s * (1.0 - s) * k(i, j) * l(i, j);
    }
  }
  return total;
}

// ---------------------------------------------------------------- rectangular

RectSensingObjective::RectSensingObjective(std::vector<Matrix> mats, Vector b_tilde)
    : b_(std::move(b_tilde)) {
  if (mats.empty()) throw DomainError("RectSensingObjective needs at least one sensing matrix");
  rows_ = mats.front().rows();
  cols_ = mats.front().cols();
  require_dim("RectSensingObjective observations", b_.size(), static_cast<Index>(mats.size()));
  stacked_.resize(static_cast<Index>(mats.size()), rows_ * cols_);
  for (std::size_t i = 0; i < mats.size(); ++i) {
    require_shape("RectSensingObjective", mats[i], rows_, cols_);
    stacked_.row(static_cast<Index>(i)) = vec(mats[i]).transpose();
  }
  zeta1_ = operator_norm_power(stacked_);
}

double RectSensingObjective::value(const Matrix& m) const {
  require_shape("rect sensing value", m, rows_, cols_);
  return 0.5 * (stacked_ * vec(m) - b_).squaredNorm();
}

Matrix RectSensingObjective::gradient(const Matrix& m) const {
  require_shape("rect sensing gradient", m, rows_, cols_);
  return unvec(stacked_.transpose() * (stacked_ * vec(m) - b_), rows_, cols_);
}

double RectSensingObjective::hess_form(const Matrix&, const Matrix& k, const Matrix& l) const {
  return (stacked_ * vec(k)).dot(stacked_ * vec(l));
}

RectOneBitObjective::RectOneBitObjective(Matrix y, Matrix w) : y_(std::move(y)), w_(std::move(w)) {
  require_shape("rect one-bit noise", w_, y_.rows(), y_.cols());
  if ((y_.array() < 0.0).any() || (y_.array() > 1.0).any()) {
    throw DomainError("one-bit observations must lie in [0, 1]");
  }
}

double RectOneBitObjective::value(const Matrix& m) const {
  require_shape("rect one-bit value", m, y_.rows(), y_.cols());
  double total = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) total -= (y_(i, j) + w_(i, j)) * m(i, j) - softplus(m(i, j));
  }
  return total;
}

Matrix RectOneBitObjective::gradient(const Matrix& m) const {
  require_shape("rect one-bit gradient", m, y_.rows(), y_.cols());
  return m.unaryExpr([](double x) { return sigmoid(x); }) - (y_ + w_);
}

double RectOneBitObjective::hess_form(const Matrix& m, const Matrix& k, const Matrix& l) const {
  return (m.unaryExpr([](double x) {
             const double s = sigmoid(x);
             return s * (1.0 - s);
           }).array() *
          k.array() * l.array())
      .sum();
}

// ---------------------------------------------------------------- lift

AsymmetricLift::AsymmetricLift(RectObjectivePtr inner, double phi)
    : inner_(std::move(inner)), phi_(phi), n_(inner_->rows()), m_(inner_->cols()) {
  if (!(phi > 0.0)) throw DomainError("asymmetric_lift: phi must be positive");
}

double AsymmetricLift::value(const SymMatrix& p) const {
  require_dim("asymmetric_lift value", p.n(), n_ + m_);
  const Matrix& pm = p.mat();
  const auto p11 = pm.topLeftCorner(n_, n_);
  const Matrix p12 = pm.topRightCorner(n_, m_);
  const Matrix p21 = pm.bottomLeftCorner(m_, n_);
  const auto p22 = pm.bottomRightCorner(m_, m_);
  const double fit = 0.5 * (inner_->value(p12) + inner_->value(p21.transpose()));
  const double reg = 0.25 * phi_ *
                     (p11.squaredNorm() + p22.squaredNorm() - p12.squaredNorm() - p21.squaredNorm());
  return fit + reg;
}

SymMatrix AsymmetricLift::gradient(const SymMatrix& p) const {
  require_dim("asymmetric_lift gradient", p.n(), n_ + m_);
  const Matrix& pm = p.mat();
  const Matrix p12 = pm.topRightCorner(n_, m_);
  const Matrix p21 = pm.bottomLeftCorner(m_, n_);
  Matrix g(n_ + m_, n_ + m_);
  g.topLeftCorner(n_, n_) = 0.5 * phi_ * pm.topLeftCorner(n_, n_);
  g.bottomRightCorner(m_, m_) = 0.5 * phi_ * pm.bottomRightCorner(m_, m_);
  g.topRightCorner(n_, m_) = 0.5 * inner_->gradient(p12) - 0.5 * phi_ * p12;
  g.bottomLeftCorner(m_, n_) =
      0.5 * inner_->gradient(p21.transpose()).transpose() - 0.5 * phi_ * p21;
  return SymMatrix(g);
}

double AsymmetricLift::hess_form(const SymMatrix& p, const Matrix& k, const Matrix& l) const {
  require_dim("asymmetric_lift hess_form", p.n(), n_ + m_);
  const Matrix& pm = p.mat();
  const Matrix p12 = pm.topRightCorner(n_, m_);
  const Matrix p21t = pm.bottomLeftCorner(m_, n_).transpose();
  const Matrix k12 = k.topRightCorner(n_, m_);
  const Matrix l12 = l.topRightCorner(n_, m_);
  const Matrix k21 = k.bottomLeftCorner(m_, n_);
  const Matrix l21 = l.bottomLeftCorner(m_, n_);
  const double fit = 0.5 * (inner_->hess_form(p12, k12, l12) +
                            inner_->hess_form(p21t, k21.transpose(), l21.transpose()));
  const double reg =
      0.5 * phi_ *
      (lrno::inner(k.topLeftCorner(n_, n_), l.topLeftCorner(n_, n_)) +
       lrno::inner(k.bottomRightCorner(m_, m_), l.bottomRightCorner(m_, m_)) - lrno::inner(k12, l12) -
       lrno::inner(k21, l21));
  return fit + reg;
}

std::shared_ptr<SensingObjective> sensing_objective(std::shared_ptr<const MeasurementOperator> op,
                                                    Vector b_tilde) {
  return std::make_shared<SensingObjective>(std::move(op), std::move(b_tilde));
}

std::shared_ptr<OneBitObjective> one_bit_objective(Matrix y, Matrix w) {
  return std::make_shared<OneBitObjective>(std::move(y), std::move(w));
}

std::shared_ptr<AsymmetricLift> asymmetric_lift(RectObjectivePtr inner, double phi) {
  return std::make_shared<AsymmetricLift>(std::move(inner), phi);
}

// ---------------------------------------------------------------- factored

double factored_value(const Objective& obj, const Factor& x) {
  require_dim("factored_value", x.rows(), obj.dim());
  return obj.value(SymMatrix::gram(x));
}

Factor factored_grad(const Objective& obj, const Factor& x) {
  require_dim("factored_grad", x.rows(), obj.dim());
  return 2.0 * obj.gradient(SymMatrix::gram(x)).mat() * x;
}

double factored_hess_form(const Objective& obj, const Factor& x, const Factor& u) {
  require_dim("factored_hess_form", x.rows(), obj.dim());
  const SymMatrix m = SymMatrix::gram(x);
  const SymMatrix dir = lifted_apply(x, u);
  return 2.0 * inner(obj.gradient(m).mat(), u * u.transpose()) +
         obj.hess_form(m, dir.mat(), dir.mat());
}

Matrix factored_hessian(const Objective& obj, const Factor& x) {
  require_dim("factored_hessian", x.rows(), obj.dim());
  const Index n = x.rows();
  const Index r = x.cols();
  const Index k = n * r;
  const SymMatrix m = SymMatrix::gram(x);
  const Matrix grad = obj.gradient(m).mat();
  std::vector<Matrix> dirs;
  dirs.reserve(static_cast<std::size_t>(k));
  Factor e = Factor::Zero(n, r);
  for (Index c = 0; c < r; ++c) {
    for (Index i = 0; i < n; ++i) {
      e(i, c) = 1.0;
      dirs.push_back(lifted_apply(x, e).mat());
      e(i, c) = 0.0;
    }
  }
  Matrix h = obj.hess_gram(m, dirs);
  // 2 <G, sym(E_a E_b^T)> is nonzero only for equal columns: 2 G(i, j).
  for (Index c = 0; c < r; ++c) {
    h.block(c * n, c * n, n, n) += 2.0 * grad;
  }
  return (h + h.transpose()) * 0.5;
}

double noise_gradient_deviation(const Objective& noisy, const Objective& clean, const SymMatrix& m,
                                const Matrix& k) {
  if (noisy.kind() != clean.kind() || noisy.dim() != clean.dim()) {
    throw ShapeError("noise_gradient_deviation: objectives differ in kind or dimension");
  }
  return std::abs(inner(noisy.gradient(m).mat() - clean.gradient(m).mat(), k));
}

}  // namespace lrno
