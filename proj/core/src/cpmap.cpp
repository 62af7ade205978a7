#include "qiw/cpmap.hpp"

namespace qiw {

CPMap::CPMap(AlgebraSpec s, Index k, std::vector<Matrix> blocks)
    : spec(std::move(s)), out_dim(k), choi(std::move(blocks)) {
  spec.check_valid();
  if (out_dim < 1) throw Error(ErrorCode::ShapeMismatch, "CPMap: output dimension must be >= 1");
  if (static_cast<Index>(choi.size()) != spec.num_factors())
    throw Error(ErrorCode::ShapeMismatch, "CPMap: one Choi block per factor required");
  for (Index s_i = 0; s_i < spec.num_factors(); ++s_i) {
    const Index expect = spec.block_dims[static_cast<size_t>(s_i)] * out_dim;
    const Matrix& c = choi[static_cast<size_t>(s_i)];
    if (c.rows() != expect || c.cols() != expect)
      throw Error(ErrorCode::ShapeMismatch, "CPMap: Choi block shape mismatch");
    if (!is_finite(c)) throw Error(ErrorCode::ShapeMismatch, "CPMap: non-finite Choi entries");
  }
}

CPMap CPMap::zero(const AlgebraSpec& spec, Index k) {
  std::vector<Matrix> blocks;
  for (Index d : spec.block_dims) blocks.push_back(Matrix::Zero(d * k, d * k));
  return CPMap(spec, k, std::move(blocks));
}

CPMap CPMap::operator+(const CPMap& rhs) const {
  if (spec != rhs.spec || out_dim != rhs.out_dim)
    throw Error(ErrorCode::SpecMismatch, "CPMap: mismatched maps in sum");
  CPMap out = *this;
  for (size_t s = 0; s < choi.size(); ++s) out.choi[s] += rhs.choi[s];
  return out;
}

CPMap CPMap::operator-(const CPMap& rhs) const {
  if (spec != rhs.spec || out_dim != rhs.out_dim)
    throw Error(ErrorCode::SpecMismatch, "CPMap: mismatched maps in difference");
  CPMap out = *this;
  for (size_t s = 0; s < choi.size(); ++s) out.choi[s] -= rhs.choi[s];
  return out;
}

CPMap CPMap::operator*(double scale) const {
  CPMap out = *this;
  for (Matrix& c : out.choi) c *= scale;
  return out;
}

double CPMap::choi_norm() const {
  double norm = 0.0;
  for (const Matrix& c : choi) norm = std::max(norm, fro_norm(c));
  return norm;
}

bool CPMap::is_zero(const Tolerance& tol) const {
  for (const Matrix& c : choi)
    if (fro_norm(c) > tol.eq_tol(1.0)) return false;
  return true;
}

Matrix apply(const CPMap& phi, const AlgebraElement& a) {
  if (a.spec != phi.spec) throw Error(ErrorCode::SpecMismatch, "apply: algebra spec mismatch");
  const Index k = phi.out_dim;
  Matrix out = Matrix::Zero(k, k);
  for (Index s = 0; s < phi.spec.num_factors(); ++s) {
    const Index d = phi.spec.block_dims[static_cast<size_t>(s)];
    const Matrix& c = phi.choi[static_cast<size_t>(s)];
    const Matrix& block = a.blocks[static_cast<size_t>(s)];
    for (Index p = 0; p < d; ++p)
      for (Index q = 0; q < d; ++q) {
        const Complex w = block(p, q);
        if (w == Complex(0, 0)) continue;
        out += w * c.block(p * k, q * k, k, k);
      }
  }
  return out;
}

Matrix apply_identity(const CPMap& phi) {
  const Index k = phi.out_dim;
  Matrix out = Matrix::Zero(k, k);
  for (Index s = 0; s < phi.spec.num_factors(); ++s) {
    const Index d = phi.spec.block_dims[static_cast<size_t>(s)];
    const Matrix& c = phi.choi[static_cast<size_t>(s)];
    for (Index p = 0; p < d; ++p) out += c.block(p * k, p * k, k, k);
  }
  return out;
}

bool validate_cp(const CPMap& phi, const Tolerance& tol) {
  for (const Matrix& c : phi.choi) {
    try {
      if (!psd_check(c, tol)) return false;
    } catch (const Error&) {
      return false;  // non-Hermitian Choi block
    }
  }
  return true;
}

bool is_unital(const CPMap& phi, const Tolerance& tol) {
  Matrix unit = apply_identity(phi);
  return fro_norm(unit - Matrix::Identity(phi.out_dim, phi.out_dim)) <= tol.eq_tol(1.0);
}

KrausSet kraus_minimal(const CPMap& phi, const Tolerance& tol) {
  KrausSet out;
  out.spec = phi.spec;
  out.out_dim = phi.out_dim;
  const Index k = phi.out_dim;
  for (Index s = 0; s < phi.spec.num_factors(); ++s) {
    const Index d = phi.spec.block_dims[static_cast<size_t>(s)];
    const Matrix& c = phi.choi[static_cast<size_t>(s)];
    std::vector<Matrix> ops;
    if (fro_norm(c) > tol.eps) {
      HermEig eig;
      try {
        eig = herm_eig(c, tol);
      } catch (const Error&) {
        throw Error(ErrorCode::NotCP, "kraus_minimal: Choi block not Hermitian");
      }
      const double floor = tol.psd_floor(fro_norm(c));
      const double cut = tol.rank_cut(std::abs(eig.values(0)), c.rows(), c.cols());
      for (Index j = 0; j < eig.values.size(); ++j) {
        const double lambda = eig.values(j);
        if (lambda < floor) throw Error(ErrorCode::NotCP, "kraus_minimal: Choi block not PSD");
        if (lambda <= cut) continue;
        Vector w = std::sqrt(lambda) * eig.vectors.col(j).conjugate();
        ops.push_back(unvec_rm(w, d, k));
      }
    }
    out.ops.push_back(std::move(ops));
  }
  return out;
}

CPMap cpmap_from_kraus(const KrausSet& kraus) {
  kraus.spec.check_valid();
  const Index k = kraus.out_dim;
  if (static_cast<Index>(kraus.ops.size()) != kraus.spec.num_factors())
    throw Error(ErrorCode::ShapeMismatch, "cpmap_from_kraus: one operator list per factor");
  std::vector<Matrix> blocks;
  for (Index s = 0; s < kraus.spec.num_factors(); ++s) {
    const Index d = kraus.spec.block_dims[static_cast<size_t>(s)];
    Matrix c = Matrix::Zero(d * k, d * k);
    for (const Matrix& op : kraus.ops[static_cast<size_t>(s)]) {
      if (op.rows() != d || op.cols() != k)
        throw Error(ErrorCode::ShapeMismatch, "cpmap_from_kraus: Kraus operator must be d_s x k");
      Vector w = vec_rm(op);
      c += w.conjugate() * w.transpose();
    }
    blocks.push_back(std::move(c));
  }
  return CPMap(kraus.spec, k, std::move(blocks));
}

CPMap compress(const CPMap& phi, const Matrix& w, const Tolerance& tol) {
  if (w.rows() != phi.out_dim)
    throw Error(ErrorCode::ShapeMismatch, "compress: isometry row count mismatch");
  if (!is_isometry_columns(w, tol))
    throw Error(ErrorCode::NotIsometry, "compress: W*W != I");
  std::vector<Matrix> blocks;
  for (Index s = 0; s < phi.spec.num_factors(); ++s) {
    const Index d = phi.spec.block_dims[static_cast<size_t>(s)];
    Matrix lift = kron(Matrix::Identity(d, d), w);
    blocks.push_back(lift.adjoint() * phi.choi[static_cast<size_t>(s)] * lift);
  }
  return CPMap(phi.spec, w.cols(), std::move(blocks));
}

Matrix Stinespring::rep(const AlgebraElement& a) const {
  if (a.spec != spec) throw Error(ErrorCode::SpecMismatch, "Stinespring::rep: spec mismatch");
  Matrix out = Matrix::Zero(total_dim, total_dim);
  for (const StinespringFactor& f : factors) {
    const Matrix& block = a.blocks[static_cast<size_t>(f.factor)];
    out.block(f.offset, f.offset, f.d * f.rank, f.d * f.rank) =
        kron(block, Matrix::Identity(f.rank, f.rank));
  }
  return out;
}

Stinespring stinespring_minimal(const CPMap& phi, const Tolerance& tol) {
  KrausSet kraus = kraus_minimal(phi, tol);
  Stinespring out;
  out.spec = phi.spec;
  out.out_dim = phi.out_dim;
  Index offset = 0;
  for (Index s = 0; s < phi.spec.num_factors(); ++s) {
    const auto& ops = kraus.ops[static_cast<size_t>(s)];
    if (ops.empty()) continue;
    StinespringFactor f;
    f.factor = s;
    f.d = phi.spec.block_dims[static_cast<size_t>(s)];
    f.rank = static_cast<Index>(ops.size());
    f.offset = offset;
    offset += f.d * f.rank;
    out.factors.push_back(f);
  }
  out.total_dim = offset;
  out.V = Matrix::Zero(offset, phi.out_dim);
  for (const StinespringFactor& f : out.factors) {
    const auto& ops = kraus.ops[static_cast<size_t>(f.factor)];
    // Row (p,j) of the block holds row p of K_j, i.e. V h = Σ_j (K_j h) ⊗ e_j.
    for (Index p = 0; p < f.d; ++p)
      for (Index j = 0; j < f.rank; ++j)
        out.V.row(f.offset + p * f.rank + j) = ops[static_cast<size_t>(j)].row(p);
  }
  return out;
}

bool is_pure_cpmap(const CPMap& phi, const Tolerance& tol) {
  KrausSet kraus = kraus_minimal(phi, tol);
  Index nonzero_factors = 0;
  bool rank_one = true;
  for (const auto& ops : kraus.ops) {
    if (ops.empty()) continue;
    ++nonzero_factors;
    if (ops.size() != 1) rank_one = false;
  }
  return nonzero_factors == 1 && rank_one;
}

bool is_homomorphism(const CPMap& phi, const Tolerance& tol) {
  const auto basis = matrix_unit_basis(phi.spec);
  std::vector<Matrix> images;
  images.reserve(basis.size());
  for (const auto& b : basis) images.push_back(apply(phi, b));
  const double scale = std::max(1.0, phi.choi_norm());
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) {
      Matrix lhs = apply(phi, basis[i] * basis[j]);
      if (fro_norm(lhs - images[i] * images[j]) > tol.eq_tol(scale)) return false;
    }
  return true;
}

}  // namespace qiw
