#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qiw {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorCode {
  NotHermitian,
  NotPSD,
  NotCP,
  NotIsometry,
  NotUnitary,
  NotUnital,
  NotNormalized,
  NotDominated,
  InvalidDerivative,
  NotAnAlgebra,
  SpecMismatch,
  ShapeMismatch,
  CoefficientsNotNormalized,
  TheoryViolation,
  CheckFailed,
  ParseError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

/// Single tolerance knob. Every decision threshold in the library is a
/// documented function of eps together with the scale of the data involved.
struct Tolerance {
  double eps = 1e-8;

  // Hermiticity slack for a matrix of the given norm.
  double herm_tol(double norm) const { return eps * std::max(1.0, norm); }
  // psd_check accepts lambda_min >= psd_floor(norm).
  double psd_floor(double norm) const { return -eps * std::max(1.0, norm); }
  // Singular values at or below this count as zero.
  double rank_cut(double sigma_max, Index rows, Index cols) const {
    return eps * sigma_max * static_cast<double>(std::max(rows, cols));
  }
  // Projection test: ||P^2 - P|| <= proj_tol(dim).
  double proj_tol(Index dim) const { return eps * static_cast<double>(dim); }
  // Equality of matrices living at the given scale.
  double eq_tol(double scale) const { return eps * std::max(1.0, scale); }
};

inline double fro_norm(const Matrix& m) { return m.norm(); }
double op_norm(const Matrix& m);

bool is_finite(const Matrix& m);
bool is_hermitian(const Matrix& m, const Tolerance& tol);

/// Kronecker product, row-major index convention: (a⊗b)[(i,p),(j,q)] = a[i,j]·b[p,q].
Matrix kron(const Matrix& a, const Matrix& b);

/// Row-major vectorization, so that vec(A·X·B) = (A ⊗ Bᵀ)·vec(X).
Vector vec_rm(const Matrix& m);
Matrix unvec_rm(const Vector& v, Index rows, Index cols);

struct HermEig {
  RealVector values;  // descending
  Matrix vectors;     // orthonormal columns, aligned with values
};

/// Eigendecomposition of a Hermitian matrix with deterministic ordering:
/// eigenvalues descending; inside numerically equal groups the phase-normalized
/// eigenvectors are ordered lexicographically.
HermEig herm_eig(const Matrix& m, const Tolerance& tol);

bool psd_check(const Matrix& m, const Tolerance& tol);

/// Positive square root of a PSD matrix. Throws NotPSD.
Matrix psd_sqrt(const Matrix& m, const Tolerance& tol);

struct RankNullspace {
  Index rank = 0;
  Matrix null_basis;  // orthonormal columns spanning the right null space
};

/// Singular values at or below tol.rank_cut(max(σ_max, scale_floor), …) count
/// as zero. Pass a positive scale_floor when deciding constraint systems
/// whose matrix may legitimately vanish; the default is fully relative.
RankNullspace rank_nullspace(const Matrix& m, const Tolerance& tol, double scale_floor = 0.0);

Index matrix_rank(const Matrix& m, const Tolerance& tol, double scale_floor = 0.0);

struct LeastSquares {
  Vector x;
  double residual = 0.0;
};

/// Minimum-norm least-squares solution of A·x = b.
LeastSquares least_squares(const Matrix& a, const Vector& b);

/// Orthonormal basis of the span of the given vectors (possibly empty).
std::vector<Vector> orthonormalize(const std::vector<Vector>& vectors, const Tolerance& tol,
                                   double scale_floor = 0.0);

/// Same, with vectors as matrix columns; returns a matrix with rank columns.
Matrix orthonormal_columns(const Matrix& m, const Tolerance& tol, double scale_floor = 0.0);

bool is_projection(const Matrix& p, const Tolerance& tol);
bool is_isometry_columns(const Matrix& w, const Tolerance& tol);  // W*W = I
bool is_unitary(const Matrix& u, const Tolerance& tol);

/// True when p <= q as Hermitian operators, up to tolerance.
bool psd_leq(const Matrix& p, const Matrix& q, const Tolerance& tol);

}  // namespace qiw
