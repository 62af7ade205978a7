#include "qiw/certificates.hpp"

namespace qiw {

const char* cert_kind_name(CertKind kind) {
  switch (kind) {
    case CertKind::Dilation: return "dilation";
    case CertKind::Extreme: return "extreme";
    case CertKind::NonExtreme: return "non_extreme";
    case CertKind::CstarExtreme: return "cstar_extreme";
    case CertKind::NotCstarExtreme: return "not_cstar_extreme";
    case CertKind::Rn: return "rn";
    case CertKind::DecomposableRefutation: return "decomposable_refutation";
  }
  return "unknown";
}

DilationExport DilationExport::from(const BiDilation& dil) {
  DilationExport out;
  out.spec = dil.spec;
  out.out_dim = dil.out_dim;
  out.n_outcomes = dil.n_outcomes;
  out.blocks = dil.blocks;
  out.total_dim = dil.total_dim;
  out.V = dil.V;
  return out;
}

BiDilation DilationExport::to_bidilation() const {
  BiDilation dil;
  dil.spec = spec;
  dil.out_dim = out_dim;
  dil.n_outcomes = n_outcomes;
  dil.blocks = blocks;
  dil.total_dim = total_dim;
  dil.V = V;
  if (V.rows() != total_dim || V.cols() != out_dim)
    throw Error(ErrorCode::ShapeMismatch, "DilationExport: V shape mismatch");
  Index expected = 0;
  for (const DilationBlock& b : blocks) {
    if (b.offset != expected)
      throw Error(ErrorCode::ShapeMismatch, "DilationExport: inconsistent block offsets");
    expected += b.d * b.r;
  }
  if (expected != total_dim)
    throw Error(ErrorCode::ShapeMismatch, "DilationExport: block table does not cover the space");
  return dil;
}

Certificate make_dilation_certificate(const BiDilation& dil) {
  Certificate cert;
  cert.kind = CertKind::Dilation;
  cert.payload = DilationExport::from(dil);
  return cert;
}

Certificate make_extreme_certificate(const Instrument& ins, const ExtremeResult& result,
                                     const Tolerance& tol) {
  ExtremePayload payload;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    KrausSet kraus = kraus_minimal(ins.map(i), tol);
    for (Index s = 0; s < ins.spec.num_factors(); ++s) {
      const auto& ops = kraus.ops[static_cast<size_t>(s)];
      if (!ops.empty())
        payload.ranks.push_back({i, s, static_cast<Index>(ops.size())});
    }
  }
  payload.commutant_dim = result.commutant_dim;
  payload.compression_rank = result.compression_rank;
  Certificate cert;
  cert.kind = CertKind::Extreme;
  cert.payload = std::move(payload);
  return cert;
}

Certificate make_nonextreme_certificate(const ExtremeResult& result) {
  if (!result.witness_pair)
    throw Error(ErrorCode::ShapeMismatch, "make_nonextreme_certificate: missing witness pair");
  NonExtremePayload payload;
  payload.plus = result.witness_pair->first;
  payload.minus = result.witness_pair->second;
  Certificate cert;
  cert.kind = CertKind::NonExtreme;
  cert.payload = std::move(payload);
  return cert;
}

Certificate make_cstar_certificate(const CstarResult& result) {
  if (!result.cstar_extreme)
    throw Error(ErrorCode::ShapeMismatch, "make_cstar_certificate: result is not a positive verdict");
  CstarExtremePayload payload;
  payload.unitary = result.global_unitary;
  for (const PureBlock& block : result.blocks)
    payload.blocks.push_back({block.outcome, block.factor, block.compression});
  Certificate cert;
  cert.kind = CertKind::CstarExtreme;
  cert.payload = std::move(payload);
  return cert;
}

Certificate make_not_cstar_certificate(const NonProjectionWitness& witness) {
  NotCstarExtremePayload payload;
  payload.outcome = witness.outcome;
  payload.eigenvalue = witness.eigenvalue;
  payload.eigenvector = witness.eigenvector;
  Certificate cert;
  cert.kind = CertKind::NotCstarExtreme;
  cert.payload = std::move(payload);
  return cert;
}

Certificate make_rn_certificate(const Instrument& dominated, const BiDilation& dil,
                                const RNDerivative& derivative) {
  RnPayload payload;
  payload.dominated = dominated;
  payload.dilation = DilationExport::from(dil);
  payload.coords = derivative.coords;
  payload.d = derivative.D;
  Certificate cert;
  cert.kind = CertKind::Rn;
  cert.payload = std::move(payload);
  return cert;
}

Certificate make_decomposable_refutation(const Instrument& ins) {
  DecomposabilityDefect defect = decomposability_defect(ins);
  DecomposableRefutationPayload payload;
  payload.outcome = defect.outcome;
  payload.basis_index = defect.basis_index;
  Certificate cert;
  cert.kind = CertKind::DecomposableRefutation;
  cert.payload = std::move(payload);
  return cert;
}

namespace {

struct Checker {
  CheckReport report;

  bool clause(const std::string& name, bool ok) {
    report.checked_clauses.push_back(name);
    if (!ok && report.failed_clause.empty()) report.failed_clause = name;
    return ok;
  }

  CheckReport finish() {
    report.pass = report.failed_clause.empty();
    return report;
  }
};

CheckReport check_dilation(const DilationExport& payload, const Instrument& ins,
                           const Tolerance& tol) {
  Checker c;
  BiDilation dil;
  try {
    dil = payload.to_bidilation();
  } catch (const Error&) {
    c.clause("block_table", false);
    return c.finish();
  }
  c.clause("block_table", true);
  if (!c.clause("shape", dil.spec == ins.spec && dil.out_dim == ins.out_dim &&
                             dil.n_outcomes == ins.n_outcomes()))
    return c.finish();
  DilationReport report = verify_bidilation(ins, dil, tol);
  const double scale = std::max(1.0, ins.choi_norm());
  c.clause("reconstruction", report.reconstruction_residual <= 10.0 * tol.eq_tol(scale));
  c.clause("commutation", report.commutation_residual <= tol.eq_tol(1.0));
  c.clause("spectrality", report.spectrality_defect <= tol.eq_tol(1.0));
  c.clause("minimality", report.minimal);
  if (validate(ins, tol, true).pass)
    c.clause("isometry", report.isometry_defect <= 10.0 * tol.eq_tol(1.0));
  return c.finish();
}

CheckReport check_extreme(const ExtremePayload& payload, const Instrument& ins,
                          const Tolerance& tol) {
  Checker c;
  // Recompute the minimal Kraus ranks and the joint independence of the
  // products K_j* K_l across all outcomes and factors.
  std::vector<Matrix> products;
  std::vector<ExtremePayload::RankEntry> ranks;
  Index commutant_dim = 0;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    KrausSet kraus = kraus_minimal(ins.map(i), tol);
    for (Index s = 0; s < ins.spec.num_factors(); ++s) {
      const auto& ops = kraus.ops[static_cast<size_t>(s)];
      if (ops.empty()) continue;
      const Index r = static_cast<Index>(ops.size());
      ranks.push_back({i, s, r});
      commutant_dim += r * r;
      for (Index j = 0; j < r; ++j)
        for (Index l = 0; l < r; ++l)
          products.push_back(ops[static_cast<size_t>(j)].adjoint() * ops[static_cast<size_t>(l)]);
    }
  }
  bool ranks_match = ranks.size() == payload.ranks.size();
  for (size_t t = 0; ranks_match && t < ranks.size(); ++t)
    ranks_match = ranks[t].outcome == payload.ranks[t].outcome &&
                  ranks[t].factor == payload.ranks[t].factor && ranks[t].r == payload.ranks[t].r;
  if (!c.clause("kraus_ranks", ranks_match)) return c.finish();
  if (!c.clause("commutant_dim", commutant_dim == payload.commutant_dim)) return c.finish();

  Matrix stacked(ins.out_dim * ins.out_dim, static_cast<Index>(products.size()));
  for (size_t t = 0; t < products.size(); ++t)
    stacked.col(static_cast<Index>(t)) = vec_rm(products[t]);
  Index rank = matrix_rank(stacked, tol);
  c.clause("compression_rank", rank == payload.compression_rank);
  c.clause("joint_independence", rank == commutant_dim);
  return c.finish();
}

CheckReport check_non_extreme(const NonExtremePayload& payload, const Instrument& ins,
                              const Tolerance& tol) {
  Checker c;
  if (!c.clause("shape", payload.plus.spec == ins.spec && payload.minus.spec == ins.spec &&
                             payload.plus.out_dim == ins.out_dim &&
                             payload.minus.out_dim == ins.out_dim &&
                             payload.plus.n_outcomes() == ins.n_outcomes() &&
                             payload.minus.n_outcomes() == ins.n_outcomes()))
    return c.finish();
  c.clause("plus_valid", validate(payload.plus, tol, true).pass);
  c.clause("minus_valid", validate(payload.minus, tol, true).pass);
  const double scale = std::max(1.0, ins.choi_norm());
  double midpoint_defect = 0.0;
  double distance = 0.0;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    for (Index s = 0; s < ins.spec.num_factors(); ++s) {
      const Matrix& cp = payload.plus.map(i).choi[static_cast<size_t>(s)];
      const Matrix& cm = payload.minus.map(i).choi[static_cast<size_t>(s)];
      const Matrix& ci = ins.map(i).choi[static_cast<size_t>(s)];
      midpoint_defect = std::max(midpoint_defect, fro_norm(0.5 * (cp + cm) - ci));
      distance = std::max(distance, fro_norm(cp - cm));
    }
  }
  c.clause("midpoint", midpoint_defect <= 10.0 * tol.eq_tol(scale));
  c.clause("distinct", distance > 10.0 * tol.eq_tol(scale));
  return c.finish();
}

CheckReport check_cstar(const CstarExtremePayload& payload, const Instrument& ins,
                        const Tolerance& tol) {
  Checker c;
  const Index k = ins.out_dim;
  if (!c.clause("unitary_shape", payload.unitary.rows() == k && payload.unitary.cols() == k))
    return c.finish();
  c.clause("unitary", is_unitary(payload.unitary, tol));

  Index total_mult = 0;
  bool isometries = true;
  bool factors_ok = true;
  for (const auto& block : payload.blocks) {
    factors_ok = factors_ok && block.outcome >= 0 && block.outcome < ins.n_outcomes() &&
                 block.factor >= 0 && block.factor < ins.spec.num_factors() &&
                 block.compression.rows() ==
                     ins.spec.block_dims[static_cast<size_t>(block.factor)];
    if (!factors_ok) break;
    isometries = isometries && is_isometry_columns(block.compression, tol);
    total_mult += block.compression.cols();
  }
  if (!c.clause("block_shape", factors_ok && total_mult == k)) return c.finish();
  c.clause("isometry", isometries);

  // Per-(outcome, irrep) range projections must be totally ordered.
  bool nested = true;
  for (size_t a = 0; a < payload.blocks.size() && nested; ++a)
    for (size_t b = a + 1; b < payload.blocks.size() && nested; ++b) {
      const auto &x = payload.blocks[a], &y = payload.blocks[b];
      if (x.outcome != y.outcome || x.factor != y.factor) continue;
      Matrix px = x.compression * x.compression.adjoint();
      Matrix py = y.compression * y.compression.adjoint();
      nested = psd_leq(px, py, tol) || psd_leq(py, px, tol);
    }
  c.clause("nesting", nested);

  const auto units = matrix_unit_basis(ins.spec);
  double defect = 0.0;
  double scale = 1.0;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    for (const auto& unit : units) {
      Matrix direct = Matrix::Zero(k, k);
      Index off = 0;
      for (const auto& block : payload.blocks) {
        const Index m = block.compression.cols();
        if (block.outcome == i)
          direct.block(off, off, m, m) = block.compression.adjoint() *
                                         unit.blocks[static_cast<size_t>(block.factor)] *
                                         block.compression;
        off += m;
      }
      Matrix expect = apply(ins.map(i), unit);
      scale = std::max(scale, fro_norm(expect));
      defect = std::max(
          defect, fro_norm(payload.unitary.adjoint() * direct * payload.unitary - expect));
    }
  }
  c.clause("reconstruction", defect <= 10.0 * tol.eq_tol(scale));
  return c.finish();
}

CheckReport check_not_cstar(const NotCstarExtremePayload& payload, const Instrument& ins,
                            const Tolerance& tol) {
  Checker c;
  if (!c.clause("shape", payload.outcome >= 0 && payload.outcome < ins.n_outcomes() &&
                             payload.eigenvector.size() == ins.out_dim))
    return c.finish();
  c.clause("unit_vector", std::abs(payload.eigenvector.norm() - 1.0) <= 10.0 * tol.eq_tol(1.0));
  c.clause("eigenvalue_interior", payload.eigenvalue > 10.0 * tol.eps &&
                                      payload.eigenvalue < 1.0 - 10.0 * tol.eps);
  Matrix effect = apply_identity(ins.map(payload.outcome));
  double resid = (effect * payload.eigenvector - payload.eigenvalue * payload.eigenvector).norm();
  c.clause("eigenpair", resid <= 10.0 * tol.eq_tol(fro_norm(effect)));
  return c.finish();
}

CheckReport check_rn(const RnPayload& payload, const Instrument& ins, const Tolerance& tol) {
  Checker c;
  BiDilation dil;
  try {
    dil = payload.dilation.to_bidilation();
  } catch (const Error&) {
    c.clause("block_table", false);
    return c.finish();
  }
  c.clause("block_table", true);
  if (!c.clause("shape", dil.spec == ins.spec && dil.out_dim == ins.out_dim &&
                             dil.n_outcomes == ins.n_outcomes() &&
                             payload.dominated.spec == ins.spec &&
                             payload.dominated.out_dim == ins.out_dim &&
                             payload.dominated.n_outcomes() == ins.n_outcomes()))
    return c.finish();
  DilationReport dil_report = verify_bidilation(ins, dil, tol);
  const double scale = std::max(1.0, ins.choi_norm());
  c.clause("dilation", dil_report.reconstruction_residual <= 10.0 * tol.eq_tol(scale) &&
                           dil_report.minimal);

  // D must be exactly the structured combination of the claimed coordinates.
  HermitianCommutantBasis basis = hermitian_commutant_basis(dil);
  if (!c.clause("coords_shape", static_cast<Index>(payload.coords.size()) == basis.dimension() &&
                                    payload.d.rows() == dil.total_dim &&
                                    payload.d.cols() == dil.total_dim))
    return c.finish();
  Matrix assembled = basis.assemble(payload.coords);
  c.clause("coords", fro_norm(assembled - payload.d) <= 10.0 * tol.eq_tol(fro_norm(payload.d)));

  bool contraction = true;
  try {
    HermEig eig = herm_eig(payload.d, tol);
    if (eig.values.size() > 0)
      contraction = eig.values(eig.values.size() - 1) >= -10.0 * tol.eps &&
                    eig.values(0) <= 1.0 + 10.0 * tol.eps;
  } catch (const Error&) {
    contraction = false;
  }
  c.clause("contraction", contraction);
  c.clause("dominated_valid", validate(payload.dominated, tol, false).cp_pass);

  const auto units = matrix_unit_basis(ins.spec);
  double defect = 0.0;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    Matrix de = payload.d * dil.spectral_projector(i);
    for (const auto& unit : units) {
      Matrix expect = apply(payload.dominated.map(i), unit);
      Matrix got = dil.V.adjoint() * de * dil.pi(unit) * dil.V;
      defect = std::max(defect, fro_norm(got - expect));
    }
  }
  c.clause("reproduces", defect <= 10.0 * tol.eq_tol(scale));
  return c.finish();
}

CheckReport check_decomposable_refutation(const DecomposableRefutationPayload& payload,
                                          const Instrument& ins, const Tolerance& tol) {
  Checker c;
  const auto units = matrix_unit_basis(ins.spec);
  if (!c.clause("shape", payload.outcome >= 0 && payload.outcome < ins.n_outcomes() &&
                             payload.basis_index >= 0 &&
                             payload.basis_index < static_cast<Index>(units.size())))
    return c.finish();
  CPMap phi = cp_marginal(ins);
  Povm mu = povm_marginal(ins);
  const AlgebraElement& unit = units[static_cast<size_t>(payload.basis_index)];
  const double scale = std::max(1.0, ins.choi_norm());
  double defect = fro_norm(apply(ins.map(payload.outcome), unit) -
                           apply(phi, unit) * mu.effects[static_cast<size_t>(payload.outcome)]);
  c.clause("violated", defect > 10.0 * tol.eq_tol(scale));
  return c.finish();
}

}  // namespace

CheckReport check_certificate(const Certificate& cert, const Instrument& ins,
                              const Tolerance& tol) {
  switch (cert.kind) {
    case CertKind::Dilation:
      return check_dilation(std::get<DilationExport>(cert.payload), ins, tol);
    case CertKind::Extreme:
      return check_extreme(std::get<ExtremePayload>(cert.payload), ins, tol);
    case CertKind::NonExtreme:
      return check_non_extreme(std::get<NonExtremePayload>(cert.payload), ins, tol);
    case CertKind::CstarExtreme:
      return check_cstar(std::get<CstarExtremePayload>(cert.payload), ins, tol);
    case CertKind::NotCstarExtreme:
      return check_not_cstar(std::get<NotCstarExtremePayload>(cert.payload), ins, tol);
    case CertKind::Rn:
      return check_rn(std::get<RnPayload>(cert.payload), ins, tol);
    case CertKind::DecomposableRefutation:
      return check_decomposable_refutation(std::get<DecomposableRefutationPayload>(cert.payload),
                                           ins, tol);
  }
  throw Error(ErrorCode::CheckFailed, "check_certificate: unknown certificate kind");
}

}  // namespace qiw
