#pragma once

#include <variant>

#include "qiw/convexity.hpp"

namespace qiw {

enum class CertKind {
  Dilation,
  Extreme,
  NonExtreme,
  CstarExtreme,
  NotCstarExtreme,
  Rn,
  DecomposableRefutation,
};

const char* cert_kind_name(CertKind kind);

/// Bi-dilation data in exportable form: the block table and V. The implicit
/// π and E are reconstructed from the table.
struct DilationExport {
  AlgebraSpec spec;
  Index out_dim = 0;
  Index n_outcomes = 0;
  std::vector<DilationBlock> blocks;
  Index total_dim = 0;
  Matrix V;

  static DilationExport from(const BiDilation& dil);
  BiDilation to_bidilation() const;
};

struct ExtremePayload {
  struct RankEntry {
    Index outcome = 0;
    Index factor = 0;
    Index r = 0;
  };
  std::vector<RankEntry> ranks;
  Index commutant_dim = 0;
  Index compression_rank = 0;
};

struct NonExtremePayload {
  Instrument plus;
  Instrument minus;
};

struct CstarExtremePayload {
  struct Block {
    Index outcome = 0;
    Index factor = 0;
    Matrix compression;  // d_factor × m isometry columns
  };
  Matrix unitary;  // k×k, rows grouped by block in listed order
  std::vector<Block> blocks;
};

struct NotCstarExtremePayload {
  Index outcome = 0;
  double eigenvalue = 0.0;
  Vector eigenvector;
};

struct RnPayload {
  Instrument dominated;
  DilationExport dilation;        // of the dominating instrument
  std::vector<double> coords;     // over hermitian_commutant_basis
  Matrix d;
};

struct DecomposableRefutationPayload {
  Index outcome = 0;
  Index basis_index = 0;  // into matrix_unit_basis(spec)
};

struct Certificate {
  CertKind kind = CertKind::Dilation;
  std::variant<DilationExport, ExtremePayload, NonExtremePayload, CstarExtremePayload,
               NotCstarExtremePayload, RnPayload, DecomposableRefutationPayload>
      payload;
};

Certificate make_dilation_certificate(const BiDilation& dil);
Certificate make_extreme_certificate(const Instrument& ins, const ExtremeResult& result,
                                     const Tolerance& tol);
Certificate make_nonextreme_certificate(const ExtremeResult& result);
Certificate make_cstar_certificate(const CstarResult& result);
Certificate make_not_cstar_certificate(const NonProjectionWitness& witness);
Certificate make_rn_certificate(const Instrument& dominated, const BiDilation& dil,
                                const RNDerivative& derivative);
Certificate make_decomposable_refutation(const Instrument& ins);

struct CheckReport {
  bool pass = false;
  std::string failed_clause;  // first violated clause, empty on pass
  std::vector<std::string> checked_clauses;
};

/// Re-verifies a certificate against the instrument it claims to describe,
/// using only instrument arithmetic and the linear-algebra kernel.
CheckReport check_certificate(const Certificate& cert, const Instrument& ins,
                              const Tolerance& tol);

}  // namespace qiw
