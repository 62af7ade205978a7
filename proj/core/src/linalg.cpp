#include "qiw/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace qiw {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotCP: return "NotCP";
    case ErrorCode::NotIsometry: return "NotIsometry";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NotUnital: return "NotUnital";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NotDominated: return "NotDominated";
    case ErrorCode::InvalidDerivative: return "InvalidDerivative";
    case ErrorCode::NotAnAlgebra: return "NotAnAlgebra";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::CoefficientsNotNormalized: return "CoefficientsNotNormalized";
    case ErrorCode::TheoryViolation: return "TheoryViolation";
    case ErrorCode::CheckFailed: return "CheckFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool is_finite(const Matrix& m) { return m.allFinite(); }

bool is_hermitian(const Matrix& m, const Tolerance& tol) {
  if (m.rows() != m.cols()) return false;
  return fro_norm(m - m.adjoint()) <= tol.herm_tol(fro_norm(m));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec_rm(const Matrix& m) {
  Vector v(m.size());
  Index idx = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v(idx++) = m(i, j);
  return v;
}

Matrix unvec_rm(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw Error(ErrorCode::ShapeMismatch, "unvec_rm: size mismatch");
  Matrix m(rows, cols);
  Index idx = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = v(idx++);
  return m;
}

namespace {

// Multiply each column by a unit phase making its first significant entry
// real and positive, so that eigenvector ordering does not depend on the
// backend's phase gauge.
void phase_normalize_columns(Matrix& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    double cap = m.col(c).cwiseAbs().maxCoeff();
    if (cap <= 0) continue;
    for (Index r = 0; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > 1e-12 * cap) {
        Complex z = m(r, c);
        m.col(c) *= std::conj(z) / std::abs(z);
        break;
      }
    }
  }
}

bool column_lex_less(const Matrix& m, Index a, Index b) {
  for (Index r = 0; r < m.rows(); ++r) {
    const Complex &x = m(r, a), &y = m(r, b);
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

}  // namespace

HermEig herm_eig(const Matrix& m, const Tolerance& tol) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::NotHermitian, "herm_eig: matrix not square");
  if (!is_hermitian(m, tol))
    throw Error(ErrorCode::NotHermitian, "herm_eig: matrix not Hermitian within tolerance");
  Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NotHermitian, "herm_eig: eigensolver failed");

  const Index dim = m.rows();
  RealVector vals = solver.eigenvalues();
  Matrix vecs = solver.eigenvectors();
  phase_normalize_columns(vecs);

  std::vector<Index> order(static_cast<size_t>(dim));
  std::iota(order.begin(), order.end(), Index{0});
  const double group_eps = tol.eps * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (std::abs(vals(a) - vals(b)) > group_eps) return vals(a) > vals(b);
    return column_lex_less(vecs, a, b);
  });

  HermEig out;
  out.values.resize(dim);
  out.vectors.resize(dim, dim);
  for (Index c = 0; c < dim; ++c) {
    out.values(c) = vals(order[static_cast<size_t>(c)]);
    out.vectors.col(c) = vecs.col(order[static_cast<size_t>(c)]);
  }
  return out;
}

bool psd_check(const Matrix& m, const Tolerance& tol) {
  HermEig eig = herm_eig(m, tol);
  if (eig.values.size() == 0) return true;
  return eig.values(eig.values.size() - 1) >= tol.psd_floor(fro_norm(m));
}

Matrix psd_sqrt(const Matrix& m, const Tolerance& tol) {
  HermEig eig = herm_eig(m, tol);
  const double floor = tol.psd_floor(fro_norm(m));
  RealVector roots(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) < floor)
      throw Error(ErrorCode::NotPSD, "psd_sqrt: negative eigenvalue");
    roots(i) = std::sqrt(std::max(0.0, eig.values(i)));
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

RankNullspace rank_nullspace(const Matrix& m, const Tolerance& tol, double scale_floor) {
  RankNullspace out;
  if (m.size() == 0) {
    out.rank = 0;
    out.null_basis = Matrix::Identity(m.cols(), m.cols());
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const RealVector& sigma = svd.singularValues();
  const double sigma_max = std::max(sigma.size() > 0 ? sigma(0) : 0.0, scale_floor);
  const double cut = tol.rank_cut(sigma_max, m.rows(), m.cols());
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut) ++rank;
  out.rank = rank;
  out.null_basis = svd.matrixV().rightCols(m.cols() - rank);
  return out;
}

Index matrix_rank(const Matrix& m, const Tolerance& tol, double scale_floor) {
  return rank_nullspace(m, tol, scale_floor).rank;
}

LeastSquares least_squares(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size())
    throw Error(ErrorCode::ShapeMismatch, "least_squares: incompatible dimensions");
  LeastSquares out;
  if (a.cols() == 0) {
    out.x = Vector::Zero(0);
    out.residual = b.norm();
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  out.x = cod.solve(b);
  out.residual = (a * out.x - b).norm();
  return out;
}

std::vector<Vector> orthonormalize(const std::vector<Vector>& vectors, const Tolerance& tol,
                                   double scale_floor) {
  if (vectors.empty()) return {};
  const Index dim = vectors.front().size();
  Matrix stacked(dim, static_cast<Index>(vectors.size()));
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim)
      throw Error(ErrorCode::ShapeMismatch, "orthonormalize: mixed vector lengths");
    stacked.col(static_cast<Index>(i)) = vectors[i];
  }
  Matrix basis = orthonormal_columns(stacked, tol, scale_floor);
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(basis.cols()));
  for (Index c = 0; c < basis.cols(); ++c) out.push_back(basis.col(c));
  return out;
}

Matrix orthonormal_columns(const Matrix& m, const Tolerance& tol, double scale_floor) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const RealVector& sigma = svd.singularValues();
  const double sigma_max = std::max(sigma.size() > 0 ? sigma(0) : 0.0, scale_floor);
  const double cut = tol.rank_cut(sigma_max, m.rows(), m.cols());
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

bool is_projection(const Matrix& p, const Tolerance& tol) {
  if (p.rows() != p.cols()) return false;
  if (!is_hermitian(p, tol)) return false;
  return fro_norm(p * p - p) <= tol.proj_tol(p.rows());
}

bool is_isometry_columns(const Matrix& w, const Tolerance& tol) {
  Matrix gram = w.adjoint() * w;
  return fro_norm(gram - Matrix::Identity(w.cols(), w.cols())) <= tol.eq_tol(1.0);
}

bool is_unitary(const Matrix& u, const Tolerance& tol) {
  return u.rows() == u.cols() && is_isometry_columns(u, tol) &&
         is_isometry_columns(u.adjoint(), tol);
}

bool psd_leq(const Matrix& p, const Matrix& q, const Tolerance& tol) {
  Matrix diff = q - p;
  return psd_check(0.5 * (diff + diff.adjoint()), tol);
}

}  // namespace qiw
