#include "qiw/instrument.hpp"

#include <set>

namespace qiw {

Matrix Povm::total() const {
  Matrix sum = Matrix::Zero(out_dim, out_dim);
  for (const Matrix& e : effects) sum += e;
  return sum;
}

bool Povm::is_normalized(const Tolerance& tol) const {
  return fro_norm(total() - Matrix::Identity(out_dim, out_dim)) <= tol.eq_tol(1.0);
}

void Povm::check_shapes() const {
  if (out_dim < 1) throw Error(ErrorCode::ShapeMismatch, "Povm: output dimension must be >= 1");
  for (const Matrix& e : effects)
    if (e.rows() != out_dim || e.cols() != out_dim)
      throw Error(ErrorCode::ShapeMismatch, "Povm: effect shape mismatch");
}

bool povm_validate(const Povm& povm, const Tolerance& tol) {
  povm.check_shapes();
  for (const Matrix& e : povm.effects) {
    try {
      if (!psd_check(e, tol)) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

bool povm_spectral(const Povm& povm, const Tolerance& tol) {
  for (const Matrix& e : povm.effects)
    if (!is_projection(e, tol)) return false;
  for (size_t i = 0; i < povm.effects.size(); ++i)
    for (size_t j = i + 1; j < povm.effects.size(); ++j)
      if (fro_norm(povm.effects[i] * povm.effects[j]) > tol.proj_tol(povm.out_dim)) return false;
  return true;
}

Instrument::Instrument(AlgebraSpec s, Index k, std::vector<CPMap> m)
    : spec(std::move(s)), out_dim(k), maps(std::move(m)) {
  spec.check_valid();
  if (maps.empty()) throw Error(ErrorCode::ShapeMismatch, "Instrument: at least one outcome");
  for (const CPMap& phi : maps) {
    if (phi.spec != spec || phi.out_dim != out_dim)
      throw Error(ErrorCode::SpecMismatch, "Instrument: outcome map spec mismatch");
  }
}

double Instrument::choi_norm() const {
  double norm = 0.0;
  for (const CPMap& phi : maps) norm = std::max(norm, phi.choi_norm());
  return norm;
}

ValidationReport validate(const Instrument& ins, const Tolerance& tol, bool require_unital) {
  ValidationReport report;
  report.require_unital = require_unital;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    const CPMap& phi = ins.map(i);
    OutcomeValidation ov;
    ov.outcome = i;
    double min_eig = 0.0;
    for (const Matrix& c : phi.choi) {
      ov.herm_defect = std::max(ov.herm_defect, fro_norm(c - c.adjoint()));
      Matrix sym = 0.5 * (c + c.adjoint());
      Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
      if (solver.eigenvalues().size() > 0)
        min_eig = std::min(min_eig, solver.eigenvalues()(0));
      if (ov.herm_defect > tol.herm_tol(fro_norm(c)) ||
          solver.eigenvalues()(0) < tol.psd_floor(fro_norm(c)))
        ov.cp_ok = false;
    }
    ov.min_eigenvalue = min_eig;
    if (!ov.cp_ok) report.cp_pass = false;
    report.outcomes.push_back(ov);
  }
  Matrix total = apply_identity(cp_marginal(ins));
  report.normalization_defect =
      op_norm(total - Matrix::Identity(ins.out_dim, ins.out_dim));
  report.unital_pass = report.normalization_defect <= tol.eq_tol(1.0);
  report.pass = report.cp_pass && (!require_unital || report.unital_pass);
  return report;
}

Matrix value(const Instrument& ins, const std::vector<Index>& subset, const AlgebraElement& a) {
  Matrix out = Matrix::Zero(ins.out_dim, ins.out_dim);
  std::set<Index> seen;
  for (Index i : subset) {
    if (i < 0 || i >= ins.n_outcomes())
      throw Error(ErrorCode::ShapeMismatch, "value: outcome index out of range");
    if (!seen.insert(i).second) continue;
    out += apply(ins.map(i), a);
  }
  return out;
}

Povm povm_marginal(const Instrument& ins) {
  Povm povm;
  povm.out_dim = ins.out_dim;
  for (const CPMap& phi : ins.maps) povm.effects.push_back(apply_identity(phi));
  return povm;
}

CPMap cp_marginal(const Instrument& ins) {
  CPMap total = CPMap::zero(ins.spec, ins.out_dim);
  for (const CPMap& phi : ins.maps) total = total + phi;
  return total;
}

ZeroEquivalence zero_equivalence(const Instrument& ins, const Tolerance& tol) {
  ZeroEquivalence out;
  out.instrument_zero = true;
  for (const CPMap& phi : ins.maps)
    if (!phi.is_zero(tol)) out.instrument_zero = false;
  out.povm_zero = true;
  for (const Matrix& e : povm_marginal(ins).effects)
    if (fro_norm(e) > tol.eq_tol(1.0)) out.povm_zero = false;
  out.cp_zero = cp_marginal(ins).is_zero(tol);
  return out;
}

Instrument from_cpmap(const CPMap& phi) {
  return Instrument(phi.spec, phi.out_dim, {phi});
}

Instrument povm_as_instrument_trivial_algebra(const Povm& povm) {
  povm.check_shapes();
  AlgebraSpec spec{{1}};
  std::vector<CPMap> maps;
  for (const Matrix& e : povm.effects)
    maps.push_back(CPMap(spec, povm.out_dim, {e}));
  return Instrument(spec, povm.out_dim, std::move(maps));
}

Instrument instrument_from_povm_naimark(const Povm& povm, const Tolerance& tol) {
  povm.check_shapes();
  if (!povm.is_normalized(tol))
    throw Error(ErrorCode::NotNormalized, "instrument_from_povm_naimark: POVM effects must sum to I");
  const Index n = povm.n_outcomes();
  const Index k = povm.out_dim;
  AlgebraSpec spec;
  spec.block_dims.assign(static_cast<size_t>(n), 1);
  std::vector<CPMap> maps;
  for (Index i = 0; i < n; ++i) {
    std::vector<Matrix> blocks;
    for (Index s = 0; s < n; ++s)
      blocks.push_back(s == i ? povm.effects[static_cast<size_t>(i)] : Matrix::Zero(k, k));
    maps.push_back(CPMap(spec, k, std::move(blocks)));
  }
  return Instrument(spec, k, std::move(maps));
}

Instrument luders(const Povm& povm, const Tolerance& tol) {
  povm.check_shapes();
  const Index k = povm.out_dim;
  AlgebraSpec spec{{k}};
  std::vector<CPMap> maps;
  for (const Matrix& e : povm.effects) {
    KrausSet kraus;
    kraus.spec = spec;
    kraus.out_dim = k;
    try {
      kraus.ops = {{psd_sqrt(e, tol)}};
    } catch (const Error&) {
      throw Error(ErrorCode::NotPSD, "luders: POVM effect is not PSD");
    }
    maps.push_back(cpmap_from_kraus(kraus));
  }
  return Instrument(spec, k, std::move(maps));
}

Instrument direct_sum(const std::vector<Instrument>& parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "direct_sum: empty list");
  const AlgebraSpec& spec = parts.front().spec;
  const Index n = parts.front().n_outcomes();
  Index total_k = 0;
  for (const Instrument& part : parts) {
    if (part.spec != spec || part.n_outcomes() != n)
      throw Error(ErrorCode::SpecMismatch, "direct_sum: parts must share algebra and outcome set");
    total_k += part.out_dim;
  }
  std::vector<CPMap> maps;
  for (Index i = 0; i < n; ++i) {
    std::vector<Matrix> blocks;
    for (Index s = 0; s < spec.num_factors(); ++s) {
      const Index d = spec.block_dims[static_cast<size_t>(s)];
      Matrix c = Matrix::Zero(d * total_k, d * total_k);
      Index off = 0;
      for (const Instrument& part : parts) {
        const Index kj = part.out_dim;
        const Matrix& cj = part.map(i).choi[static_cast<size_t>(s)];
        for (Index p = 0; p < d; ++p)
          for (Index q = 0; q < d; ++q)
            c.block(p * total_k + off, q * total_k + off, kj, kj) =
                cj.block(p * kj, q * kj, kj, kj);
        off += kj;
      }
      blocks.push_back(std::move(c));
    }
    maps.push_back(CPMap(spec, total_k, std::move(blocks)));
  }
  return Instrument(spec, total_k, std::move(maps));
}

namespace {

Instrument conjugate_by(const Instrument& ins, const Matrix& t) {
  std::vector<CPMap> maps;
  for (const CPMap& phi : ins.maps) {
    std::vector<Matrix> blocks;
    for (Index s = 0; s < ins.spec.num_factors(); ++s) {
      const Index d = ins.spec.block_dims[static_cast<size_t>(s)];
      Matrix lift = kron(Matrix::Identity(d, d), t);
      blocks.push_back(lift.adjoint() * phi.choi[static_cast<size_t>(s)] * lift);
    }
    maps.push_back(CPMap(ins.spec, t.cols(), std::move(blocks)));
  }
  return Instrument(ins.spec, t.cols(), std::move(maps));
}

}  // namespace

Instrument compress_instrument(const Instrument& ins, const Matrix& w, const Tolerance& tol) {
  if (w.rows() != ins.out_dim)
    throw Error(ErrorCode::ShapeMismatch, "compress_instrument: isometry row count mismatch");
  if (!is_isometry_columns(w, tol))
    throw Error(ErrorCode::NotIsometry, "compress_instrument: W*W != I");
  return conjugate_by(ins, w);
}

Instrument unitary_conjugate(const Instrument& ins, const Matrix& u, const Tolerance& tol) {
  if (u.rows() != ins.out_dim || u.cols() != ins.out_dim)
    throw Error(ErrorCode::ShapeMismatch, "unitary_conjugate: dimension mismatch");
  if (!is_unitary(u, tol))
    throw Error(ErrorCode::NotUnitary, "unitary_conjugate: U not unitary");
  return conjugate_by(ins, u);
}

Instrument cstar_convex_combine(const std::vector<Instrument>& parts,
                                const std::vector<Matrix>& coefficients, const Tolerance& tol) {
  if (parts.empty() || parts.size() != coefficients.size())
    throw Error(ErrorCode::ShapeMismatch, "cstar_convex_combine: need one coefficient per part");
  const Index k = parts.front().out_dim;
  const Index n = parts.front().n_outcomes();
  const AlgebraSpec& spec = parts.front().spec;
  Matrix gram = Matrix::Zero(k, k);
  for (size_t j = 0; j < parts.size(); ++j) {
    if (parts[j].spec != spec || parts[j].out_dim != k || parts[j].n_outcomes() != n)
      throw Error(ErrorCode::SpecMismatch, "cstar_convex_combine: parts mismatch");
    if (coefficients[j].rows() != k || coefficients[j].cols() != k)
      throw Error(ErrorCode::ShapeMismatch, "cstar_convex_combine: coefficient shape mismatch");
    gram += coefficients[j].adjoint() * coefficients[j];
  }
  if (fro_norm(gram - Matrix::Identity(k, k)) > tol.eq_tol(1.0))
    throw Error(ErrorCode::CoefficientsNotNormalized, "cstar_convex_combine: Σ T*T != I");

  std::vector<CPMap> maps;
  for (Index i = 0; i < n; ++i) maps.push_back(CPMap::zero(spec, k));
  for (size_t j = 0; j < parts.size(); ++j) {
    Instrument term = conjugate_by(parts[j], coefficients[j]);
    for (Index i = 0; i < n; ++i)
      maps[static_cast<size_t>(i)] = maps[static_cast<size_t>(i)] + term.map(i);
  }
  return Instrument(spec, k, std::move(maps));
}

bool is_spectral(const Instrument& ins, const Tolerance& tol) {
  Povm mu = povm_marginal(ins);
  if (!mu.is_normalized(tol)) return false;
  if (!povm_spectral(mu, tol)) return false;
  CPMap phi = cp_marginal(ins);
  if (!is_homomorphism(phi, tol)) return false;
  const auto basis = matrix_unit_basis(ins.spec);
  const double scale = std::max(1.0, ins.choi_norm());
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    const Matrix& effect = mu.effects[static_cast<size_t>(i)];
    for (const auto& b : basis) {
      Matrix lhs = apply(ins.map(i), b);
      Matrix mid = apply(phi, b);
      if (fro_norm(lhs - mid * effect) > tol.eq_tol(scale)) return false;
      if (fro_norm(lhs - effect * mid) > tol.eq_tol(scale)) return false;
    }
  }
  return true;
}

DecomposabilityDefect decomposability_defect(const Instrument& ins) {
  CPMap phi = cp_marginal(ins);
  Povm mu = povm_marginal(ins);
  const auto basis = matrix_unit_basis(ins.spec);
  DecomposabilityDefect worst;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    for (size_t b = 0; b < basis.size(); ++b) {
      double defect = fro_norm(apply(ins.map(i), basis[b]) -
                               apply(phi, basis[b]) * mu.effects[static_cast<size_t>(i)]);
      if (defect > worst.defect) {
        worst.outcome = i;
        worst.basis_index = static_cast<Index>(b);
        worst.defect = defect;
      }
    }
  }
  return worst;
}

bool is_decomposable(const Instrument& ins, const Tolerance& tol) {
  const double scale = std::max(1.0, ins.choi_norm());
  return decomposability_defect(ins).defect <= tol.eq_tol(scale);
}

bool is_concentrated(const Instrument& ins, const std::vector<Index>& subset,
                     const Tolerance& tol) {
  std::set<Index> inside(subset.begin(), subset.end());
  for (Index i = 0; i < ins.n_outcomes(); ++i)
    if (!inside.count(i) && !ins.map(i).is_zero(tol)) return false;
  return true;
}

std::vector<std::vector<Index>> atoms(const Instrument& ins, const Tolerance& tol) {
  std::vector<std::vector<Index>> out;
  for (Index i = 0; i < ins.n_outcomes(); ++i)
    if (!ins.map(i).is_zero(tol)) out.push_back({i});
  return out;
}

bool has_commutative_range(const Instrument& ins, const Tolerance& tol) {
  const auto basis = matrix_unit_basis(ins.spec);
  std::vector<Matrix> values;
  for (Index i = 0; i < ins.n_outcomes(); ++i)
    for (const auto& b : basis) values.push_back(apply(ins.map(i), b));
  double scale = 1.0;
  for (const Matrix& v : values) scale = std::max(scale, fro_norm(v));
  for (size_t a = 0; a < values.size(); ++a)
    for (size_t b = a + 1; b < values.size(); ++b)
      if (fro_norm(values[a] * values[b] - values[b] * values[a]) > tol.eq_tol(scale * scale))
        return false;
  return true;
}

}  // namespace qiw
