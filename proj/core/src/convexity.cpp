#include "qiw/convexity.hpp"

#include <algorithm>
#include <sstream>

#include "qiw/rng.hpp"

namespace qiw {

namespace {

// Slack factor for internal consistency assertions; violations indicate a
// numerical breakdown or a genuine theory gap, never a quiet "false".
constexpr double kSelfCheckSlack = 100.0;

RealVector real_stack(const Matrix& m) {
  RealVector out(2 * m.size());
  Index idx = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      out(idx) = m(i, j).real();
      out(idx + m.size()) = m(i, j).imag();
      ++idx;
    }
  return out;
}

struct RealLstsq {
  RealVector x;
  double residual = 0.0;
};

RealLstsq real_least_squares(const RealMatrix& a, const RealVector& b) {
  RealLstsq out;
  if (a.cols() == 0) {
    out.x = RealVector::Zero(0);
    out.residual = b.norm();
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
  out.x = cod.solve(b);
  out.residual = (a * out.x - b).norm();
  return out;
}

}  // namespace

bool dominates(const Instrument& j, const Instrument& i, const Tolerance& tol) {
  if (j.spec != i.spec || j.out_dim != i.out_dim || j.n_outcomes() != i.n_outcomes())
    throw Error(ErrorCode::SpecMismatch, "dominates: instruments not comparable");
  for (Index o = 0; o < i.n_outcomes(); ++o) {
    CPMap diff = i.map(o) - j.map(o);
    if (!validate_cp(diff, tol)) return false;
  }
  return true;
}

Matrix HermitianCommutantBasis::assemble(const std::vector<double>& coords) const {
  if (coords.size() != elements.size())
    throw Error(ErrorCode::ShapeMismatch, "HermitianCommutantBasis: coordinate count mismatch");
  if (elements.empty()) return Matrix::Zero(0, 0);
  Matrix out = Matrix::Zero(elements.front().rows(), elements.front().cols());
  for (size_t t = 0; t < elements.size(); ++t) out += coords[t] * elements[t];
  return out;
}

HermitianCommutantBasis hermitian_commutant_basis(const BiDilation& dil) {
  HermitianCommutantBasis out;
  for (size_t bi = 0; bi < dil.blocks.size(); ++bi) {
    const DilationBlock& b = dil.blocks[bi];
    auto push = [&](const Matrix& unit, Index j, Index l, int kind) {
      Matrix element = Matrix::Zero(dil.total_dim, dil.total_dim);
      element.block(b.offset, b.offset, b.d * b.r, b.d * b.r) =
          kron(Matrix::Identity(b.d, b.d), unit);
      out.entries.push_back({static_cast<Index>(bi), j, l, kind});
      out.elements.push_back(std::move(element));
    };
    for (Index j = 0; j < b.r; ++j) {
      Matrix unit = Matrix::Zero(b.r, b.r);
      unit(j, j) = Complex(1, 0);
      push(unit, j, j, 0);
    }
    for (Index j = 0; j < b.r; ++j)
      for (Index l = j + 1; l < b.r; ++l) {
        Matrix re = Matrix::Zero(b.r, b.r);
        re(j, l) = Complex(1, 0);
        re(l, j) = Complex(1, 0);
        push(re, j, l, 1);
        Matrix im = Matrix::Zero(b.r, b.r);
        im(j, l) = Complex(0, 1);
        im(l, j) = Complex(0, -1);
        push(im, j, l, 2);
      }
  }
  return out;
}

namespace {

// The linear data of the extreme-point criterion: the map D ↦ V*DV from
// Hermitian commutant coordinates into Hermitian k×k matrices.
struct ExtremeAnalysis {
  HermitianCommutantBasis basis;
  RealMatrix compression;  // 2k² × m
  Index rank = 0;
  RealMatrix kernel;  // m × (m − rank), orthonormal columns
};

ExtremeAnalysis analyze_extremality(const BiDilation& dil, const Tolerance& tol) {
  ExtremeAnalysis out;
  out.basis = hermitian_commutant_basis(dil);
  const Index m = out.basis.dimension();
  const Index k = dil.out_dim;
  out.compression.resize(2 * k * k, m);
  for (Index t = 0; t < m; ++t) {
    Matrix g = dil.V.adjoint() * out.basis.elements[static_cast<size_t>(t)] * dil.V;
    out.compression.col(t) = real_stack(g);
  }
  if (m == 0) {
    out.rank = 0;
    out.kernel.resize(0, 0);
    return out;
  }
  Eigen::JacobiSVD<RealMatrix> svd(out.compression, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cut = tol.rank_cut(std::max(sigma.size() > 0 ? sigma(0) : 0.0, 1.0),
                                  out.compression.rows(), m);
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut) ++rank;
  out.rank = rank;
  out.kernel = svd.matrixV().rightCols(m - rank);
  return out;
}

}  // namespace

RNDerivative rn_derivative(const Instrument& j, const BiDilation& dil_i, const Tolerance& tol) {
  if (j.spec != dil_i.spec || j.out_dim != dil_i.out_dim || j.n_outcomes() != dil_i.n_outcomes)
    throw Error(ErrorCode::SpecMismatch, "rn_derivative: instruments not comparable");
  HermitianCommutantBasis basis = hermitian_commutant_basis(dil_i);
  const Index m = basis.dimension();
  const Index k = dil_i.out_dim;
  const auto units = matrix_unit_basis(j.spec);
  const Index rows_per = 2 * k * k;
  const Index total_rows = rows_per * static_cast<Index>(units.size()) * j.n_outcomes();

  RealMatrix a(total_rows, m);
  RealVector rhs(total_rows);
  Index row = 0;
  std::vector<Matrix> projectors;
  for (Index i = 0; i < j.n_outcomes(); ++i) projectors.push_back(dil_i.spectral_projector(i));
  for (Index i = 0; i < j.n_outcomes(); ++i) {
    for (const auto& unit : units) {
      Matrix pe = dil_i.pi(unit) * projectors[static_cast<size_t>(i)];
      for (Index t = 0; t < m; ++t) {
        Matrix g = dil_i.V.adjoint() * basis.elements[static_cast<size_t>(t)] * pe * dil_i.V;
        a.block(row, t, rows_per, 1) = real_stack(g);
      }
      rhs.segment(row, rows_per) = real_stack(apply(j.map(i), unit));
      row += rows_per;
    }
  }

  RealLstsq solve = real_least_squares(a, rhs);
  const double resid_cap = 10.0 * tol.eq_tol(std::max(1.0, rhs.norm()));
  if (solve.residual > resid_cap)
    throw Error(ErrorCode::NotDominated, "rn_derivative: values leave the dominated cone");

  RNDerivative out;
  out.coords.assign(solve.x.data(), solve.x.data() + solve.x.size());
  out.D = basis.assemble(out.coords);
  out.residual = solve.residual;
  if (out.D.size() > 0) {
    HermEig eig = herm_eig(out.D, tol);
    const double slack = tol.eq_tol(1.0);
    if (eig.values(eig.values.size() - 1) < -10.0 * slack ||
        eig.values(0) > 1.0 + 10.0 * slack)
      throw Error(ErrorCode::NotDominated, "rn_derivative: derivative spectrum outside [0, 1]");
  }
  return out;
}

RNDerivative rn_derivative(const Instrument& j, const Instrument& i, const Tolerance& tol) {
  return rn_derivative(j, minimal_bidilation(i, tol), tol);
}

Instrument rn_apply(const BiDilation& dil, const Matrix& d, const Tolerance& tol) {
  if (d.rows() != dil.total_dim || d.cols() != dil.total_dim)
    throw Error(ErrorCode::ShapeMismatch, "rn_apply: derivative dimension mismatch");
  const double scale = std::max(1.0, fro_norm(d));
  if (fro_norm(d - d.adjoint()) > tol.herm_tol(fro_norm(d)))
    throw Error(ErrorCode::InvalidDerivative, "rn_apply: derivative not Hermitian");
  const auto units = matrix_unit_basis(dil.spec);
  for (const auto& unit : units) {
    Matrix rep = dil.pi(unit);
    if (fro_norm(d * rep - rep * d) > kSelfCheckSlack * tol.eq_tol(scale))
      throw Error(ErrorCode::InvalidDerivative, "rn_apply: derivative not in the commutant");
  }
  for (Index i = 0; i < dil.n_outcomes; ++i) {
    Matrix p = dil.spectral_projector(i);
    if (fro_norm(d * p - p * d) > kSelfCheckSlack * tol.eq_tol(scale))
      throw Error(ErrorCode::InvalidDerivative, "rn_apply: derivative not in the commutant");
  }
  try {
    if (!psd_check(d, tol)) throw Error(ErrorCode::InvalidDerivative, "rn_apply: derivative not PSD");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidDerivative) throw;
    throw Error(ErrorCode::InvalidDerivative, "rn_apply: derivative not PSD");
  }

  const Index k = dil.out_dim;
  std::vector<CPMap> maps;
  for (Index i = 0; i < dil.n_outcomes; ++i) {
    Matrix de = d * dil.spectral_projector(i);
    std::vector<Matrix> choi;
    size_t unit_idx = 0;
    for (Index s = 0; s < dil.spec.num_factors(); ++s) {
      const Index ds = dil.spec.block_dims[static_cast<size_t>(s)];
      Matrix c = Matrix::Zero(ds * k, ds * k);
      for (Index p = 0; p < ds; ++p)
        for (Index q = 0; q < ds; ++q) {
          Matrix val = dil.V.adjoint() * de * dil.pi(units[unit_idx]) * dil.V;
          c.block(p * k, q * k, k, k) = val;
          ++unit_idx;
        }
      choi.push_back(std::move(c));
    }
    maps.push_back(CPMap(dil.spec, k, std::move(choi)));
  }
  return Instrument(dil.spec, k, std::move(maps));
}

Instrument rn_apply(const Instrument& i, const Matrix& d, const Tolerance& tol) {
  return rn_apply(minimal_bidilation(i, tol), d, tol);
}

bool is_pure_instrument(const Instrument& ins, const Tolerance& tol) {
  BiDilation dil = minimal_bidilation(ins, tol);
  return dil.blocks.size() == 1 && dil.blocks.front().r == 1;
}

ExtremeResult is_extreme(const Instrument& ins, const Tolerance& tol) {
  if (!validate(ins, tol, true).pass)
    throw Error(ErrorCode::NotUnital, "is_extreme: instrument must be valid and unital");
  BiDilation dil = minimal_bidilation(ins, tol);
  ExtremeAnalysis analysis = analyze_extremality(dil, tol);
  ExtremeResult out;
  out.commutant_dim = analysis.basis.dimension();
  out.compression_rank = analysis.rank;
  out.extreme = analysis.rank == out.commutant_dim;
  if (!out.extreme) {
    RealVector c = analysis.kernel.col(0);
    std::vector<double> coords(c.data(), c.data() + c.size());
    Matrix d = analysis.basis.assemble(coords);
    d = 0.5 * (d + d.adjoint());
    d /= op_norm(d);
    out.witness_d = d;
    Matrix eye = Matrix::Identity(dil.total_dim, dil.total_dim);
    out.witness_pair = std::make_pair(rn_apply(dil, eye + d, tol), rn_apply(dil, eye - d, tol));
  }
  return out;
}

bool dominated_pair_check(const Instrument& ins, uint64_t seed, Index trials,
                          const Tolerance& tol) {
  if (!validate(ins, tol, true).pass)
    throw Error(ErrorCode::NotUnital, "dominated_pair_check: instrument must be valid and unital");
  BiDilation dil = minimal_bidilation(ins, tol);
  ExtremeAnalysis analysis = analyze_extremality(dil, tol);
  const Index m = analysis.basis.dimension();
  if (m == 0) return true;
  Rng rng(seed);
  Matrix eye = Matrix::Identity(dil.total_dim, dil.total_dim);
  const auto units = matrix_unit_basis(ins.spec);
  const double scale = std::max(1.0, ins.choi_norm());
  for (Index trial = 0; trial < trials; ++trial) {
    RealVector c(m);
    for (Index t = 0; t < m; ++t) c(t) = rng.normal();
    RealVector ck = analysis.kernel * (analysis.kernel.transpose() * c);
    if (ck.norm() < 1e-10) continue;
    std::vector<double> coords(ck.data(), ck.data() + ck.size());
    Matrix d0 = analysis.basis.assemble(coords);
    d0 = 0.5 * (d0 + d0.adjoint());
    d0 /= op_norm(d0);
    // Equal-compression dominated pair (I ± D0)/2.
    Instrument j1 = rn_apply(dil, 0.5 * (eye + d0), tol);
    Instrument j2 = rn_apply(dil, 0.5 * (eye - d0), tol);
    double compression_gap = fro_norm(dil.V.adjoint() * d0 * dil.V);
    if (compression_gap > tol.eq_tol(1.0) * kSelfCheckSlack) continue;
    double diff = 0.0;
    for (Index i = 0; i < ins.n_outcomes(); ++i)
      for (const auto& unit : units)
        diff = std::max(diff, fro_norm(apply(j1.map(i), unit) - apply(j2.map(i), unit)));
    if (diff > 10.0 * tol.eq_tol(scale) && dominates(j1, ins, tol) && dominates(j2, ins, tol))
      return false;
  }
  return true;
}

Matrix embed_block_operator(const BiDilation& dil, const BlockOperator& op) {
  if (op.size() != dil.blocks.size())
    throw Error(ErrorCode::ShapeMismatch, "embed_block_operator: block count mismatch");
  Matrix out = Matrix::Zero(dil.total_dim, dil.total_dim);
  for (size_t bi = 0; bi < dil.blocks.size(); ++bi) {
    const DilationBlock& b = dil.blocks[bi];
    out.block(b.offset, b.offset, b.d * b.r, b.d * b.r) =
        kron(Matrix::Identity(b.d, b.d), op[bi]);
  }
  return out;
}

std::vector<BlockOperator> invariance_algebra(const BiDilation& dil, const Tolerance& tol) {
  CommutantBasis cb = commutant_basis(dil);
  const Index m = cb.dimension();
  Matrix range_v = orthonormal_columns(dil.V, tol);
  Matrix p = range_v * range_v.adjoint();
  Matrix complement = Matrix::Identity(dil.total_dim, dil.total_dim) - p;

  Matrix constraints(dil.total_dim * dil.total_dim, m);
  for (Index t = 0; t < m; ++t)
    constraints.col(t) = vec_rm(complement * cb.elements[static_cast<size_t>(t)] * p);
  // The whole constraint matrix vanishes when M is the full commutant, so the
  // rank decision needs an absolute scale floor.
  RankNullspace null = rank_nullspace(constraints, tol, 1.0);

  std::vector<BlockOperator> out;
  for (Index c = 0; c < null.null_basis.cols(); ++c) {
    BlockOperator op;
    for (const DilationBlock& b : dil.blocks) op.push_back(Matrix::Zero(b.r, b.r));
    for (Index t = 0; t < m; ++t) {
      const CommutantBasis::Entry& e = cb.entries[static_cast<size_t>(t)];
      op[static_cast<size_t>(e.block)](e.j, e.l) += null.null_basis(t, c);
    }
    out.push_back(std::move(op));
  }
  return out;
}

namespace {

bool in_span(const std::vector<Vector>& basis, const Vector& v, double threshold) {
  Vector resid = v;
  for (const Vector& b : basis) resid -= b * b.dot(resid);
  return resid.norm() <= threshold;
}

// Orthonormal span of the columns of a list of matrices.
Matrix column_span(const std::vector<Matrix>& mats, const Tolerance& tol) {
  if (mats.empty()) return Matrix(0, 0);
  const Index rows = mats.front().rows();
  Matrix stacked(rows, static_cast<Index>(mats.size()) * mats.front().cols());
  Index col = 0;
  for (const Matrix& m : mats) {
    stacked.block(0, col, rows, m.cols()) = m;
    col += m.cols();
  }
  return orthonormal_columns(stacked, tol, 1.0);
}

}  // namespace

std::vector<Matrix> radical(const std::vector<Matrix>& algebra_basis, const Tolerance& tol) {
  if (algebra_basis.empty()) return {};
  const Index r = algebra_basis.front().rows();
  std::vector<Vector> vecs;
  for (const Matrix& b : algebra_basis) {
    if (b.rows() != r || b.cols() != r)
      throw Error(ErrorCode::ShapeMismatch, "radical: basis elements must share a square shape");
    vecs.push_back(vec_rm(b));
  }
  std::vector<Vector> ortho = orthonormalize(vecs, tol);
  std::vector<Matrix> basis;
  for (const Vector& v : ortho) basis.push_back(unvec_rm(v, r, r));
  const Index m = static_cast<Index>(basis.size());

  // Multiplicative closure; the trace-form kernel is only the radical for a
  // genuine algebra.
  const double closure_tol = kSelfCheckSlack * tol.eq_tol(std::sqrt(static_cast<double>(r)));
  for (const Matrix& x : basis)
    for (const Matrix& y : basis)
      if (!in_span(ortho, vec_rm(x * y), closure_tol * std::max(1.0, fro_norm(x * y))))
        throw Error(ErrorCode::NotAnAlgebra, "radical: basis is not multiplicatively closed");

  Matrix gram(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      gram(b, a) = (basis[static_cast<size_t>(a)] * basis[static_cast<size_t>(b)]).trace();
  RankNullspace null = rank_nullspace(gram, tol, 1.0);

  std::vector<Matrix> rad;
  for (Index c = 0; c < null.null_basis.cols(); ++c) {
    Matrix element = Matrix::Zero(r, r);
    for (Index t = 0; t < m; ++t) element += null.null_basis(t, c) * basis[static_cast<size_t>(t)];
    rad.push_back(std::move(element));
  }

  // Nilpotency check.
  std::vector<Matrix> power = rad;
  for (Index step = 0; step < r && !power.empty(); ++step) {
    std::vector<Vector> next_vecs;
    for (const Matrix& x : power)
      for (const Matrix& y : rad) next_vecs.push_back(vec_rm(x * y));
    std::vector<Vector> next_basis = orthonormalize(next_vecs, tol, 1.0);
    power.clear();
    for (const Vector& v : next_basis) power.push_back(unvec_rm(v, r, r));
  }
  if (!power.empty())
    throw Error(ErrorCode::NotAnAlgebra, "radical: trace-form kernel is not nilpotent");
  return rad;
}

namespace {

Vector blockop_vec(const BlockOperator& op) {
  Index total = 0;
  for (const Matrix& m : op) total += m.size();
  Vector out(total);
  Index off = 0;
  for (const Matrix& m : op) {
    out.segment(off, m.size()) = vec_rm(m);
    off += m.size();
  }
  return out;
}

BlockOperator blockop_unvec(const Vector& v, const std::vector<Index>& dims) {
  BlockOperator out;
  Index off = 0;
  for (Index r : dims) {
    out.push_back(unvec_rm(v.segment(off, r * r), r, r));
    off += r * r;
  }
  return out;
}

BlockOperator blockop_mul(const BlockOperator& x, const BlockOperator& y) {
  BlockOperator out;
  for (size_t i = 0; i < x.size(); ++i) out.push_back(x[i] * y[i]);
  return out;
}

}  // namespace

NestTestResult nest_subalgebra_test(const std::vector<BlockOperator>& algebra,
                                    const std::vector<Index>& ambient_dims,
                                    const Tolerance& tol) {
  NestTestResult result;
  if (algebra.empty()) {
    result.reject_reason = "empty algebra";
    return result;
  }
  const size_t factors = ambient_dims.size();
  std::vector<Vector> raw;
  for (const BlockOperator& op : algebra) {
    if (op.size() != factors) throw Error(ErrorCode::ShapeMismatch, "nest test: factor count mismatch");
    raw.push_back(blockop_vec(op));
  }
  std::vector<Vector> ortho = orthonormalize(raw, tol);
  const Index dim_m = static_cast<Index>(ortho.size());
  std::vector<BlockOperator> basis;
  for (const Vector& v : ortho) basis.push_back(blockop_unvec(v, ambient_dims));

  double ambient_scale = 0.0;
  for (Index r : ambient_dims) ambient_scale += static_cast<double>(r);
  const double check_tol = kSelfCheckSlack * tol.eq_tol(std::sqrt(ambient_scale));

  // Unit and multiplicative closure.
  BlockOperator unit;
  for (Index r : ambient_dims) unit.push_back(Matrix::Identity(r, r));
  if (!in_span(ortho, blockop_vec(unit), check_tol)) {
    result.reject_reason = "algebra is not unital";
    return result;
  }
  for (const BlockOperator& x : basis)
    for (const BlockOperator& y : basis) {
      Vector prod = blockop_vec(blockop_mul(x, y));
      if (!in_span(ortho, prod, check_tol * std::max(1.0, prod.norm()))) {
        result.reject_reason = "algebra is not multiplicatively closed";
        return result;
      }
    }

  // The algebra must split as the direct sum of its factor compressions.
  std::vector<std::vector<Matrix>> factor_bases;
  Index split_dim = 0;
  for (size_t f = 0; f < factors; ++f) {
    std::vector<Vector> fvecs;
    for (const BlockOperator& op : basis) fvecs.push_back(vec_rm(op[f]));
    std::vector<Vector> fortho = orthonormalize(fvecs, tol);
    std::vector<Matrix> fbasis;
    for (const Vector& v : fortho)
      fbasis.push_back(unvec_rm(v, ambient_dims[f], ambient_dims[f]));
    split_dim += static_cast<Index>(fbasis.size());
    factor_bases.push_back(std::move(fbasis));
  }
  if (split_dim != dim_m) {
    result.reject_reason = "algebra does not split across the commutant factors";
    return result;
  }

  // Per-factor nest-algebra test via radical powers.
  for (size_t f = 0; f < factors; ++f) {
    const Index r = ambient_dims[f];
    const std::vector<Matrix>& fbasis = factor_bases[f];
    const Index mf = static_cast<Index>(fbasis.size());
    std::vector<Matrix> rad;
    try {
      rad = radical(fbasis, tol);
    } catch (const Error&) {
      result.reject_reason = "factor compression is not an algebra";
      result.flags.clear();
      return result;
    }

    FlagChain flag;
    if (rad.empty()) {
      // Semisimple factor: a nest algebra with trivial flag is the full M_r.
      if (mf != r * r) {
        std::ostringstream reason;
        reason << "semisimple factor of dimension " << mf << " is not all of M_" << r;
        result.reject_reason = reason.str();
        result.flags.clear();
        return result;
      }
      flag.subspaces.push_back(Matrix::Identity(r, r));
      flag.block_sizes.push_back(r);
      result.flags.push_back(std::move(flag));
      continue;
    }

    // Radical powers J ⊃ J² ⊃ …; the flag is F_l = range(J^{p-l}).
    std::vector<std::vector<Matrix>> powers{rad};
    while (!powers.back().empty() && static_cast<Index>(powers.size()) <= r) {
      std::vector<Vector> next;
      for (const Matrix& x : powers.back())
        for (const Matrix& y : rad) next.push_back(vec_rm(x * y));
      std::vector<Vector> next_ortho = orthonormalize(next, tol, 1.0);
      std::vector<Matrix> next_basis;
      for (const Vector& v : next_ortho) next_basis.push_back(unvec_rm(v, r, r));
      powers.push_back(std::move(next_basis));
    }
    if (!powers.back().empty()) {
      result.reject_reason = "radical is not nilpotent";
      result.flags.clear();
      return result;
    }
    const Index p = static_cast<Index>(powers.size());  // J^p = 0, J^{p-1} ≠ 0

    for (Index l = 1; l < p; ++l)
      flag.subspaces.push_back(column_span(powers[static_cast<size_t>(p - 1 - l)], tol));
    flag.subspaces.push_back(Matrix::Identity(r, r));

    Index prev_dim = 0;
    bool ok = true;
    for (size_t a = 0; a < flag.subspaces.size() && ok; ++a) {
      const Index dim_a = flag.subspaces[a].cols();
      if (dim_a <= prev_dim) ok = false;
      flag.block_sizes.push_back(dim_a - prev_dim);
      prev_dim = dim_a;
      if (a > 0) {
        Matrix proj = flag.subspaces[a] * flag.subspaces[a].adjoint();
        if (fro_norm(flag.subspaces[a - 1] - proj * flag.subspaces[a - 1]) > check_tol) ok = false;
      }
    }
    if (!ok || prev_dim != r) {
      result.reject_reason = "radical powers do not produce a strictly increasing flag";
      result.flags.clear();
      return result;
    }

    // Invariance of each flag subspace under the factor algebra.
    for (const Matrix& b : fbasis)
      for (const Matrix& sub : flag.subspaces) {
        Matrix proj = sub * sub.adjoint();
        if (fro_norm(b * proj - proj * b * proj) > check_tol * std::max(1.0, fro_norm(b))) {
          result.reject_reason = "flag subspace is not invariant under the algebra";
          result.flags.clear();
          return result;
        }
      }

    Index required = 0;
    for (size_t a = 0; a < flag.block_sizes.size(); ++a)
      for (size_t b = a; b < flag.block_sizes.size(); ++b)
        required += flag.block_sizes[a] * flag.block_sizes[b];
    if (mf != required) {
      std::ostringstream reason;
      reason << "factor dimension " << mf << " != block-triangular dimension " << required;
      result.reject_reason = reason.str();
      result.flags.clear();
      return result;
    }
    result.flags.push_back(std::move(flag));
  }

  result.is_nest = true;
  return result;
}

namespace {

CstarResult cstar_reject(const std::string& reason) {
  CstarResult out;
  out.cstar_extreme = false;
  out.reject_reason = reason;
  return out;
}

}  // namespace

CstarResult cstar_structure(const BiDilation& dil, const Tolerance& tol) {
  const Index k = dil.out_dim;
  if (op_norm(dil.V.adjoint() * dil.V - Matrix::Identity(k, k)) > tol.eq_tol(1.0))
    throw Error(ErrorCode::NotUnital, "cstar_structure: dilation isometry defect; instrument must be unital");

  std::vector<BlockOperator> invariance = invariance_algebra(dil, tol);
  std::vector<Index> ambient_dims;
  for (const DilationBlock& b : dil.blocks) ambient_dims.push_back(b.r);
  NestTestResult nest = nest_subalgebra_test(invariance, ambient_dims, tol);
  if (!nest.is_nest)
    return cstar_reject("invariance algebra is not a nest subalgebra (" + nest.reject_reason + ")");

  // Extract pure blocks: per dilation block, refine the flag atoms into
  // rank-one subprojections of the multiplicity space.
  const Matrix p_v = dil.V * dil.V.adjoint();
  const Matrix eye_n = Matrix::Identity(dil.total_dim, dil.total_dim);
  const double guard = kSelfCheckSlack * tol.eq_tol(1.0);
  CstarResult out;
  for (size_t bi = 0; bi < dil.blocks.size(); ++bi) {
    const DilationBlock& block = dil.blocks[bi];
    const FlagChain& flag = nest.flags[bi];
    Matrix prev = Matrix::Zero(block.r, 0);
    for (size_t level = 0; level < flag.subspaces.size(); ++level) {
      Matrix atom = flag.subspaces[level];
      if (prev.cols() > 0) {
        Matrix proj_prev = prev * prev.adjoint();
        atom = orthonormal_columns(atom - proj_prev * atom, tol);
      }
      prev = flag.subspaces[level];
      for (Index col = 0; col < atom.cols(); ++col) {
        Vector g = atom.col(col);
        Matrix q = Matrix::Zero(dil.total_dim, dil.total_dim);
        q.block(block.offset, block.offset, block.d * block.r, block.d * block.r) =
            kron(Matrix::Identity(block.d, block.d), g * g.adjoint());
        if (fro_norm((eye_n - p_v) * q * p_v) > guard)
          throw Error(ErrorCode::TheoryViolation,
                      "cstar_structure: flag-atom subprojection does not preserve range(V)");
        Matrix r_proj = dil.V.adjoint() * q * dil.V;
        r_proj = 0.5 * (r_proj + r_proj.adjoint());
        if (fro_norm(r_proj * r_proj - r_proj) > guard * static_cast<double>(k))
          throw Error(ErrorCode::TheoryViolation,
                      "cstar_structure: compressed atom projector is not idempotent");
        Matrix w = orthonormal_columns(r_proj, tol);
        const Index mult = w.cols();
        if (mult < 1)
          throw Error(ErrorCode::TheoryViolation,
                      "cstar_structure: minimality violated, atom direction missed by V");
        Matrix vw = dil.V * w;  // total_dim × mult
        Matrix compression = Matrix::Zero(block.d, mult);
        for (Index p = 0; p < block.d; ++p)
          for (Index j = 0; j < block.r; ++j)
            compression.row(p) += std::conj(g(j)) * vw.row(block.offset + p * block.r + j);
        if (fro_norm(compression.adjoint() * compression - Matrix::Identity(mult, mult)) > guard)
          throw Error(ErrorCode::TheoryViolation,
                      "cstar_structure: extracted block map is not an isometry");
        PureBlock pure;
        pure.outcome = block.outcome;
        pure.factor = block.factor;
        pure.nest_level = static_cast<Index>(level);
        pure.embed = w;
        pure.compression = compression;
        out.blocks.push_back(std::move(pure));
      }
    }
  }

  // Range nesting per (outcome, irrep) group.
  for (size_t a = 0; a < out.blocks.size(); ++a)
    for (size_t b = a + 1; b < out.blocks.size(); ++b) {
      const PureBlock &x = out.blocks[a], &y = out.blocks[b];
      if (x.outcome != y.outcome || x.factor != y.factor) continue;
      Matrix px = x.compression * x.compression.adjoint();
      Matrix py = y.compression * y.compression.adjoint();
      if (!psd_leq(px, py, tol) && !psd_leq(py, px, tol))
        throw Error(ErrorCode::TheoryViolation,
                    "cstar_structure: nest test passed but compression ranges do not nest");
    }
  // Canonical nest order: ascending range rank within each group.
  {
    std::vector<size_t> order(out.blocks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const PureBlock &x = out.blocks[a], &y = out.blocks[b];
      if (x.outcome != y.outcome) return x.outcome < y.outcome;
      if (x.factor != y.factor) return x.factor < y.factor;
      return x.compression.cols() < y.compression.cols();
    });
    std::vector<PureBlock> sorted;
    for (size_t i : order) sorted.push_back(std::move(out.blocks[i]));
    out.blocks = std::move(sorted);
    Index level = 0;
    for (size_t i = 0; i < out.blocks.size(); ++i) {
      if (i > 0 && (out.blocks[i].outcome != out.blocks[i - 1].outcome ||
                    out.blocks[i].factor != out.blocks[i - 1].factor))
        level = 0;
      out.blocks[i].nest_level = level++;
    }
  }

  out.global_unitary = Matrix::Zero(k, k);
  Index row = 0;
  for (const PureBlock& block : out.blocks) {
    out.global_unitary.block(row, 0, block.embed.cols(), k) = block.embed.adjoint();
    row += block.embed.cols();
  }
  if (row != k || !is_unitary(out.global_unitary, Tolerance{kSelfCheckSlack * tol.eps}))
    throw Error(ErrorCode::TheoryViolation, "cstar_structure: block embeddings do not assemble to a unitary");

  // Reconstruction self-check against the dilation values.
  const auto units = matrix_unit_basis(dil.spec);
  double recon_scale = 1.0;
  for (Index i = 0; i < dil.n_outcomes; ++i)
    for (const auto& unit : units) {
      Matrix expect = dil.reconstruct(i, unit);
      recon_scale = std::max(recon_scale, fro_norm(expect));
      Matrix got = Matrix::Zero(k, k);
      Index off = 0;
      for (const PureBlock& block : out.blocks) {
        const Index mult = block.compression.cols();
        if (block.outcome == i)
          got.block(off, off, mult, mult) =
              block.compression.adjoint() * unit.blocks[static_cast<size_t>(block.factor)] *
              block.compression;
        off += mult;
      }
      got = out.global_unitary.adjoint() * got * out.global_unitary;
      if (fro_norm(got - expect) > kSelfCheckSlack * tol.eq_tol(recon_scale))
        throw Error(ErrorCode::TheoryViolation, "cstar_structure: block reconstruction mismatch");
    }

  out.cstar_extreme = true;
  return out;
}

CstarResult is_cstar_extreme_ucp(const CPMap& phi, const Tolerance& tol) {
  if (!validate_cp(phi, tol) || !is_unital(phi, tol))
    throw Error(ErrorCode::NotUnital, "is_cstar_extreme_ucp: map must be UCP");
  return cstar_structure(minimal_bidilation(from_cpmap(phi), tol), tol);
}

CstarResult cstar_nest_path(const Instrument& ins, const Tolerance& tol) {
  if (!validate(ins, tol, true).pass)
    throw Error(ErrorCode::NotUnital, "cstar_nest_path: instrument must be valid and unital");
  return cstar_structure(minimal_bidilation(ins, tol), tol);
}

CstarResult is_cstar_extreme_instrument(const Instrument& ins, const Tolerance& tol) {
  if (!validate(ins, tol, true).pass)
    throw Error(ErrorCode::NotUnital, "is_cstar_extreme_instrument: instrument must be valid and unital");
  Povm mu = povm_marginal(ins);

  // Necessity: the POVM marginal of a C*-extreme instrument is spectral.
  for (Index i = 0; i < mu.n_outcomes(); ++i) {
    const Matrix& effect = mu.effects[static_cast<size_t>(i)];
    if (fro_norm(effect) <= tol.eq_tol(1.0)) continue;
    if (is_projection(effect, tol)) continue;
    HermEig eig = herm_eig(effect, tol);
    Index pick = 0;
    double best = -1.0;
    for (Index j = eig.values.size() - 1; j >= 0; --j) {
      const double lambda = eig.values(j);
      const double score = lambda * (1.0 - lambda);
      if (score > best + 1e-15) {
        best = score;
        pick = j;
      }
    }
    CstarResult out = cstar_reject("POVM marginal effect is not a projection");
    NonProjectionWitness witness;
    witness.outcome = i;
    witness.eigenvalue = eig.values(pick);
    witness.eigenvector = eig.vectors.col(pick);
    out.witness = witness;
    return out;
  }

  // Spectral marginal: the instrument splits over the effect ranges into
  // outcome-concentrated blocks, each carried by the compressed CP marginal.
  CPMap phi = cp_marginal(ins);
  const auto units = matrix_unit_basis(ins.spec);
  const double scale = std::max(1.0, ins.choi_norm());
  CstarResult out;
  for (Index i = 0; i < mu.n_outcomes(); ++i) {
    const Matrix& effect = mu.effects[static_cast<size_t>(i)];
    if (fro_norm(effect) <= tol.eq_tol(1.0)) continue;
    for (const auto& unit : units) {
      Matrix img = apply(phi, unit);
      if (fro_norm(img * effect - effect * img) > kSelfCheckSlack * tol.eq_tol(scale))
        throw Error(ErrorCode::TheoryViolation,
                    "is_cstar_extreme_instrument: CP marginal does not commute with a spectral effect");
    }
    Matrix w_i = orthonormal_columns(effect, tol);
    CPMap compressed = compress(phi, w_i, tol);
    CstarResult sub = is_cstar_extreme_ucp(compressed, tol);
    if (!sub.cstar_extreme) {
      std::ostringstream reason;
      reason << "outcome " << (i + 1) << " CP block is not C*-extreme ("
             << sub.reject_reason << ")";
      return cstar_reject(reason.str());
    }
    for (PureBlock& block : sub.blocks) {
      block.outcome = i;
      block.embed = (w_i * block.embed).eval();
      out.blocks.push_back(std::move(block));
    }
  }

  const Index k = ins.out_dim;
  out.global_unitary = Matrix::Zero(k, k);
  Index row = 0;
  for (const PureBlock& block : out.blocks) {
    out.global_unitary.block(row, 0, block.embed.cols(), k) = block.embed.adjoint();
    row += block.embed.cols();
  }
  if (row != k || !is_unitary(out.global_unitary, Tolerance{kSelfCheckSlack * tol.eps}))
    throw Error(ErrorCode::TheoryViolation,
                "is_cstar_extreme_instrument: outcome blocks do not assemble to a unitary");
  out.cstar_extreme = true;
  return out;
}

bool spectral_disjointness(const BiDilation& a, const BiDilation& b, const Tolerance& tol) {
  if (a.spec != b.spec || a.n_outcomes != b.n_outcomes)
    throw Error(ErrorCode::SpecMismatch, "spectral_disjointness: dilations not comparable");
  const Index na = a.total_dim, nb = b.total_dim;
  if (na == 0 || nb == 0) return true;
  const Index dim = nb * na;
  Matrix gram = Matrix::Zero(dim, dim);
  const auto units = matrix_unit_basis(a.spec);
  const Matrix eye_a = Matrix::Identity(na, na);
  const Matrix eye_b = Matrix::Identity(nb, nb);
  for (Index i = 0; i < a.n_outcomes; ++i) {
    Matrix ea = a.spectral_projector(i);
    Matrix eb = b.spectral_projector(i);
    for (const auto& unit : units) {
      Matrix x = a.pi(unit) * ea;               // on K_A
      Matrix y = b.pi(unit) * eb;               // on K_B
      // Constraint T·x = y·T, i.e. (I⊗xᵀ − y⊗I)·vec(T) = 0; accumulate M*M.
      gram += kron(eye_b, (x.conjugate() * x.transpose()));
      gram -= kron(y, x.conjugate());
      gram -= kron(y.adjoint(), x.transpose());
      gram += kron(y.adjoint() * y, eye_a);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (gram + gram.adjoint()));
  const RealVector& vals = solver.eigenvalues();
  const double lambda_max = std::max(0.0, vals(vals.size() - 1));
  const double sigma_cut = tol.rank_cut(std::sqrt(lambda_max), dim, dim);
  return vals(0) > sigma_cut * sigma_cut;
}

bool cp_marginal_cstar_extreme(const Instrument& ins, const Tolerance& tol) {
  return is_cstar_extreme_ucp(cp_marginal(ins), tol).cstar_extreme;
}

}  // namespace qiw
