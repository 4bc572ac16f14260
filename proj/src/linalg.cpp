#include "lrno/linalg.hpp"

#include <cmath>
#include <sstream>

namespace lrno {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "SymMatrix requires a square matrix, got " << m.rows() << "x" << m.cols();
    throw ShapeError(os.str());
  }
  if (!m.allFinite()) throw DomainError("SymMatrix entries must be finite");
  m_ = (m + m.transpose()) * 0.5;
}

SymMatrix SymMatrix::zeros(Index n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::gram(const Factor& x) { return SymMatrix(x * x.transpose()); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_); }

SymMatrix SymMatrix::operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_); }

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s); }

Spectrum eigh(const SymMatrix& m) {
  const Index n = m.n();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigh: no convergence for " << n << "x" << n
       << " matrix with Frobenius norm " << m.frobenius();
    throw NumericalError(os.str());
  }
  Spectrum s;
  s.values.resize(n);
  s.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Index k = 0; k < n; ++k) {
    s.values(k) = solver.eigenvalues()(n - 1 - k);
    Vector v = solver.eigenvectors().col(n - 1 - k);
    Index arg = 0;
    for (Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0) v = -v;
    s.vectors.col(k) = v;
  }
  return s;
}

SymMatrix project_psd_rank_r(const SymMatrix& m, Index r) {
  if (r < 1 || r > m.n()) throw DomainError("project_psd_rank_r: need 1 <= r <= n");
  const Spectrum s = eigh(m);
  Matrix out = Matrix::Zero(m.n(), m.n());
  for (Index k = 0; k < r; ++k) {
    const double lam = std::max(s.values(k), 0.0);
    if (lam > 0) out += lam * s.vectors.col(k) * s.vectors.col(k).transpose();
  }
  return SymMatrix(out);
}

Index numerical_rank(const Spectrum& s, double rel_tol) {
  if (s.values.size() == 0 || s.values(0) <= 0) return 0;
  const double cut = rel_tol * s.values(0);
  Index rank = 0;
  for (Index k = 0; k < s.values.size(); ++k) {
    if (s.values(k) > cut) ++rank;
  }
  return rank;
}

Factor psd_factor(const SymMatrix& m, Index r) {
  const Spectrum s = eigh(m);
  Factor z(m.n(), r);
  for (Index k = 0; k < r; ++k) {
    z.col(k) = s.vectors.col(k) * std::sqrt(std::max(s.values(k), 0.0));
  }
  return z;
}

double dist_factor(const Factor& x, const SymMatrix& m) {
  if (x.rows() != m.n()) throw ShapeError("dist_factor: factor rows must equal matrix dimension");
  const Index r = x.cols();
  const Spectrum s = eigh(m);
  const Index rank = numerical_rank(s);
  if (rank != r) {
    std::ostringstream os;
    os << "dist_factor: reference matrix has numerical rank " << rank << " but the factor has "
       << r << " columns";
    throw DomainError(os.str());
  }
  for (Index k = 0; k < m.n(); ++k) {
    if (s.values(k) < -1e-10 * s.values(0)) {
      throw DomainError("dist_factor: reference matrix is not positive semidefinite");
    }
  }
  Factor z0(m.n(), r);
  for (Index k = 0; k < r; ++k) z0.col(k) = s.vectors.col(k) * std::sqrt(s.values(k));
  // argmin_R ||X - Z0 R|| over orthogonal R is U V^T for Z0^T X = U S V^T.
  Eigen::JacobiSVD<Matrix> svd(z0.transpose() * x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rot = svd.matrixU() * svd.matrixV().transpose();
  return (x - z0 * rot).norm();
}

SymMatrix lifted_apply(const Factor& x, const Factor& u) {
  if (x.rows() != u.rows() || x.cols() != u.cols()) {
    throw ShapeError("lifted_apply: X and U must have the same shape");
  }
  const Matrix xu = x * u.transpose();
  return SymMatrix(xu + xu.transpose());
}

Matrix lifted_matrix(const Factor& x) {
  const Index n = x.rows();
  const Index r = x.cols();
  Matrix out(n * n, n * r);
  Factor e = Factor::Zero(n, r);
  for (Index c = 0; c < r; ++c) {
    for (Index i = 0; i < n; ++i) {
      e(i, c) = 1.0;
      out.col(i + c * n) = vec(lifted_apply(x, e).mat());
      e(i, c) = 0.0;
    }
  }
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw ShapeError("unvec: length does not match shape");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("inner: shape mismatch");
  return (a.array() * b.array()).sum();
}

Matrix sym_basis(Index n) {
  const Index d = n * (n + 1) / 2;
  Matrix b = Matrix::Zero(n * n, d);
  Index k = 0;
  for (Index i = 0; i < n; ++i) b(i + i * n, k++) = 1.0;
  const double s = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      b(i + j * n, k) = s;
      b(j + i * n, k) = s;
      ++k;
    }
  }
  return b;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace lrno
