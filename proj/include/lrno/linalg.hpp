#pragma once

#include <Eigen/Dense>

#include "lrno/error.hpp"

namespace lrno {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// n x r Burer-Monteiro factor X (M = X X^T).
using Factor = Matrix;

// Dense symmetric n x n matrix. Construction symmetrizes, so entry(i,j) and
// entry(j,i) are bitwise equal, and rejects non-finite input.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zeros(Index n);
  static SymMatrix identity(Index n);
  // X X^T
  static SymMatrix gram(const Factor& x);

  Index n() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double frobenius() const { return m_.norm(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;

 private:
  Matrix m_;
};

struct Spectrum {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, matching `values`
};

// Full symmetric eigendecomposition. Eigenvalues descending; each eigenvector
// is signed so its largest-magnitude entry (lowest index on ties) is >= 0.
Spectrum eigh(const SymMatrix& m);

// Closest PSD matrix of rank <= r in Frobenius norm: negative eigenvalues are
// clamped to zero, then the top r are kept.
SymMatrix project_psd_rank_r(const SymMatrix& m, Index r);

// Number of eigenvalues above rel_tol * lambda_1 (0 for the zero matrix).
Index numerical_rank(const Spectrum& s, double rel_tol = 1e-10);

// Z0 = U_r diag(lambda_1..r)^{1/2}, a canonical factor of a rank-r PSD matrix.
Factor psd_factor(const SymMatrix& m, Index r);

// min over factors Z of M (Z Z^T = M) of ||X - Z||_F, via orthogonal
// Procrustes on Z0^T X. Requires rank(M) == X.cols().
double dist_factor(const Factor& x, const SymMatrix& m);

// X U^T + U X^T
SymMatrix lifted_apply(const Factor& x, const Factor& u);

// The n^2 x nr matrix L with L vec(U) = vec(X U^T + U X^T), column-major vec.
Matrix lifted_matrix(const Factor& x);

// Column-stacking vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

double inner(const Matrix& a, const Matrix& b);

// Orthonormal basis of the symmetric n x n matrices as columns of an
// n^2 x n(n+1)/2 matrix: E_ii, then (E_ij + E_ji)/sqrt(2) for i < j.
Matrix sym_basis(Index n);

// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace lrno
