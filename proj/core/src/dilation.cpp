#include "qiw/dilation.hpp"

namespace qiw {

Matrix BiDilation::pi(const AlgebraElement& a) const {
  if (a.spec != spec) throw Error(ErrorCode::SpecMismatch, "BiDilation::pi: spec mismatch");
  Matrix out = Matrix::Zero(total_dim, total_dim);
  for (const DilationBlock& b : blocks) {
    out.block(b.offset, b.offset, b.d * b.r, b.d * b.r) =
        kron(a.blocks[static_cast<size_t>(b.factor)], Matrix::Identity(b.r, b.r));
  }
  return out;
}

Matrix BiDilation::spectral_projector(Index outcome) const {
  Matrix out = Matrix::Zero(total_dim, total_dim);
  for (const DilationBlock& b : blocks)
    if (b.outcome == outcome)
      out.block(b.offset, b.offset, b.d * b.r, b.d * b.r) =
          Matrix::Identity(b.d * b.r, b.d * b.r);
  return out;
}

Matrix BiDilation::reconstruct(Index outcome, const AlgebraElement& a) const {
  Matrix out = Matrix::Zero(out_dim, out_dim);
  for (const DilationBlock& b : blocks) {
    if (b.outcome != outcome) continue;
    const Index rows = b.d * b.r;
    Matrix vb = V.block(b.offset, 0, rows, out_dim);
    Matrix lifted = kron(a.blocks[static_cast<size_t>(b.factor)], Matrix::Identity(b.r, b.r));
    out += vb.adjoint() * lifted * vb;
  }
  return out;
}

Index BiDilation::commutant_dim() const {
  Index dim = 0;
  for (const DilationBlock& b : blocks) dim += b.r * b.r;
  return dim;
}

BiDilation minimal_bidilation(const Instrument& ins, const Tolerance& tol) {
  BiDilation dil;
  dil.spec = ins.spec;
  dil.out_dim = ins.out_dim;
  dil.n_outcomes = ins.n_outcomes();
  Index offset = 0;
  std::vector<std::vector<std::vector<Matrix>>> kraus_per_outcome;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    KrausSet kraus = kraus_minimal(ins.map(i), tol);  // throws NotCP
    kraus_per_outcome.push_back(kraus.ops);
    for (Index s = 0; s < ins.spec.num_factors(); ++s) {
      const auto& ops = kraus.ops[static_cast<size_t>(s)];
      if (ops.empty()) continue;
      DilationBlock block;
      block.outcome = i;
      block.factor = s;
      block.d = ins.spec.block_dims[static_cast<size_t>(s)];
      block.r = static_cast<Index>(ops.size());
      block.offset = offset;
      offset += block.d * block.r;
      dil.blocks.push_back(block);
    }
  }
  dil.total_dim = offset;
  dil.V = Matrix::Zero(offset, ins.out_dim);
  for (const DilationBlock& b : dil.blocks) {
    const auto& ops = kraus_per_outcome[static_cast<size_t>(b.outcome)][static_cast<size_t>(b.factor)];
    for (Index p = 0; p < b.d; ++p)
      for (Index j = 0; j < b.r; ++j)
        dil.V.row(b.offset + p * b.r + j) = ops[static_cast<size_t>(j)].row(p);
  }
  return dil;
}

DilationReport verify_bidilation(const Instrument& ins, const BiDilation& dil,
                                 const Tolerance& tol) {
  if (dil.spec != ins.spec || dil.out_dim != ins.out_dim || dil.n_outcomes != ins.n_outcomes())
    throw Error(ErrorCode::ShapeMismatch, "verify_bidilation: dilation does not match instrument");
  DilationReport report;
  const auto basis = matrix_unit_basis(ins.spec);

  for (Index i = 0; i < ins.n_outcomes(); ++i)
    for (const auto& b : basis)
      report.reconstruction_residual =
          std::max(report.reconstruction_residual,
                   fro_norm(dil.reconstruct(i, b) - apply(ins.map(i), b)));

  std::vector<Matrix> projectors;
  for (Index i = 0; i < ins.n_outcomes(); ++i) projectors.push_back(dil.spectral_projector(i));
  Matrix total_e = Matrix::Zero(dil.total_dim, dil.total_dim);
  for (const Matrix& p : projectors) total_e += p;
  report.spectrality_defect =
      fro_norm(total_e - Matrix::Identity(dil.total_dim, dil.total_dim));
  for (size_t a = 0; a < projectors.size(); ++a)
    for (size_t b = 0; b < projectors.size(); ++b) {
      Matrix prod = projectors[a] * projectors[b];
      if (a == b) prod -= projectors[a];
      report.spectrality_defect = std::max(report.spectrality_defect, fro_norm(prod));
    }

  for (const auto& b : basis) {
    Matrix rep = dil.pi(b);
    for (const Matrix& p : projectors)
      report.commutation_residual =
          std::max(report.commutation_residual, fro_norm(rep * p - p * rep));
  }

  // Minimality: the columns of π(b)E({i})V must span the whole dilation space.
  Matrix stacked(dil.total_dim, static_cast<Index>(basis.size()) * ins.n_outcomes() * dil.out_dim);
  Index col = 0;
  for (const auto& b : basis) {
    Matrix rep = dil.pi(b);
    for (Index i = 0; i < ins.n_outcomes(); ++i) {
      Matrix chunk = rep * projectors[static_cast<size_t>(i)] * dil.V;
      stacked.block(0, col, dil.total_dim, dil.out_dim) = chunk;
      col += dil.out_dim;
    }
  }
  report.minimality_dim = matrix_rank(stacked, tol);
  report.minimal = report.minimality_dim == dil.total_dim;

  report.isometry_defect =
      op_norm(dil.V.adjoint() * dil.V - Matrix::Identity(dil.out_dim, dil.out_dim));
  return report;
}

CommutantBasis commutant_basis(const BiDilation& dil) {
  CommutantBasis out;
  for (size_t bi = 0; bi < dil.blocks.size(); ++bi) {
    const DilationBlock& b = dil.blocks[bi];
    for (Index j = 0; j < b.r; ++j)
      for (Index l = 0; l < b.r; ++l) {
        Matrix unit = Matrix::Zero(b.r, b.r);
        unit(j, l) = Complex(1, 0);
        Matrix element = Matrix::Zero(dil.total_dim, dil.total_dim);
        element.block(b.offset, b.offset, b.d * b.r, b.d * b.r) =
            kron(Matrix::Identity(b.d, b.d), unit);
        out.entries.push_back({static_cast<Index>(bi), j, l});
        out.elements.push_back(std::move(element));
      }
  }
  return out;
}

Matrix SubminimalDilation::rep(const AlgebraElement& a) const {
  return basis.adjoint() * parent.pi(a) * basis;
}

Matrix SubminimalDilation::effect(Index outcome) const {
  return basis.adjoint() * parent.spectral_projector(outcome) * basis;
}

Matrix SubminimalDilation::compressed_v() const { return basis.adjoint() * parent.V; }

Matrix SubminimalDilation::reconstruct(Index outcome, const AlgebraElement& a) const {
  Matrix v = compressed_v();
  return v.adjoint() * rep(a) * effect(outcome) * v;
}

namespace {

SubminimalDilation subminimal_from_columns(const BiDilation& dil, const Matrix& raw_columns,
                                           const Tolerance& tol) {
  SubminimalDilation out;
  out.parent = dil;
  out.basis = orthonormal_columns(raw_columns, tol);
  out.dim = out.basis.cols();
  return out;
}

}  // namespace

SubminimalDilation cp_subminimal(const BiDilation& dil, const Tolerance& tol) {
  const auto basis = matrix_unit_basis(dil.spec);
  Matrix stacked(dil.total_dim, static_cast<Index>(basis.size()) * dil.out_dim);
  Index col = 0;
  for (const auto& b : basis) {
    stacked.block(0, col, dil.total_dim, dil.out_dim) = dil.pi(b) * dil.V;
    col += dil.out_dim;
  }
  return subminimal_from_columns(dil, stacked, tol);
}

SubminimalDilation povm_subminimal(const BiDilation& dil, const Tolerance& tol) {
  Matrix stacked(dil.total_dim, dil.n_outcomes * dil.out_dim);
  Index col = 0;
  for (Index i = 0; i < dil.n_outcomes; ++i) {
    stacked.block(0, col, dil.total_dim, dil.out_dim) = dil.spectral_projector(i) * dil.V;
    col += dil.out_dim;
  }
  return subminimal_from_columns(dil, stacked, tol);
}

DilationDims dilation_dims(const BiDilation& dil, const Tolerance& tol) {
  DilationDims dims;
  dims.bi = dil.total_dim;
  dims.cp_sub = cp_subminimal(dil, tol).dim;
  dims.povm_sub = povm_subminimal(dil, tol).dim;
  return dims;
}

bool decomposable_dilation_criterion(const BiDilation& dil, const Tolerance& tol) {
  SubminimalDilation sub = cp_subminimal(dil, tol);
  Matrix p1 = sub.basis * sub.basis.adjoint();
  Matrix range_v = dil.V * dil.V.adjoint();
  const double scale = std::max(1.0, op_norm(dil.V));
  for (Index i = 0; i < dil.n_outcomes; ++i) {
    Matrix x = p1 * dil.spectral_projector(i) * p1;
    if (fro_norm(x * range_v - range_v * x * range_v) > tol.eq_tol(scale * scale))
      return false;
  }
  return true;
}

}  // namespace qiw
