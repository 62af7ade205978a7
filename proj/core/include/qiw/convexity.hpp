#pragma once

#include <optional>

#include "qiw/dilation.hpp"

namespace qiw {

/// J ≤ I: the Choi block of Φ^I_i − Φ^J_i is PSD for every outcome and factor.
bool dominates(const Instrument& j, const Instrument& i, const Tolerance& tol);

/// Hermitian coordinates on the bi-dilation commutant: per block the r
/// diagonal units ε_jj, then for j<l the pairs ε_jl+ε_lj and i(ε_jl−ε_lj).
struct HermitianCommutantBasis {
  struct Entry {
    Index block = 0;
    Index j = 0;
    Index l = 0;
    int kind = 0;  // 0 diagonal, 1 real off-diagonal, 2 imaginary off-diagonal
  };
  std::vector<Entry> entries;
  std::vector<Matrix> elements;  // total_dim × total_dim Hermitian

  Index dimension() const { return static_cast<Index>(elements.size()); }
  Matrix assemble(const std::vector<double>& coords) const;
};

HermitianCommutantBasis hermitian_commutant_basis(const BiDilation& dil);

struct RNDerivative {
  std::vector<double> coords;  // over hermitian_commutant_basis of the dominating dilation
  Matrix D;
  double residual = 0.0;
};

/// Radon-Nikodym derivative of J with respect to I: the positive contraction
/// D in the commutant with J(A,a) = V*Dπ(a)E(A)V. Throws NotDominated.
RNDerivative rn_derivative(const Instrument& j, const Instrument& i, const Tolerance& tol);
RNDerivative rn_derivative(const Instrument& j, const BiDilation& dil_i, const Tolerance& tol);

/// J(A,a) = V*Dπ(a)E(A)V for Hermitian PSD D in the commutant. Accepts any
/// PSD commutant operator; domination by I additionally needs D ≤ I.
Instrument rn_apply(const Instrument& i, const Matrix& d, const Tolerance& tol);
Instrument rn_apply(const BiDilation& dil, const Matrix& d, const Tolerance& tol);

/// Trivial bi-dilation commutant: exactly one block, of multiplicity 1.
bool is_pure_instrument(const Instrument& ins, const Tolerance& tol);

struct ExtremeResult {
  bool extreme = false;
  Index commutant_dim = 0;
  Index compression_rank = 0;  // rank of D ↦ V*DV on Hermitian coordinates
  // Present when not extreme: Hermitian D with ||D|| = 1, V*DV = 0, and the
  // decomposition pair I± = rn_apply(I, I ± D), whose average is I.
  Matrix witness_d;
  std::optional<std::pair<Instrument, Instrument>> witness_pair;
};

/// Extreme-point test: injectivity of D ↦ V*DV on the commutant. Throws
/// NotUnital for non-normalized instruments.
ExtremeResult is_extreme(const Instrument& ins, const Tolerance& tol);

/// Randomized search for dominated pairs J₁ ≠ J₂ with equal compression
/// J₁(X)(1) = J₂(X)(1); returns false iff a counterexample was found.
bool dominated_pair_check(const Instrument& ins, uint64_t seed, Index trials,
                          const Tolerance& tol);

/// One r_b×r_b matrix per dilation block: an element of the commutant in
/// structured multiplicity coordinates.
using BlockOperator = std::vector<Matrix>;

Matrix embed_block_operator(const BiDilation& dil, const BlockOperator& op);

/// Basis of M = {S in the commutant : S·range(V) ⊆ range(V)}; always unital.
std::vector<BlockOperator> invariance_algebra(const BiDilation& dil, const Tolerance& tol);

/// Jacobson radical of a matrix algebra, computed as the kernel of the trace
/// form (x,y) ↦ tr(xy); verified nilpotent. Throws NotAnAlgebra.
std::vector<Matrix> radical(const std::vector<Matrix>& algebra_basis, const Tolerance& tol);

struct FlagChain {
  std::vector<Matrix> subspaces;   // orthonormal column bases, strictly increasing
  std::vector<Index> block_sizes;  // s_a = dim F_a − dim F_{a−1}
};

struct NestTestResult {
  bool is_nest = false;
  std::vector<FlagChain> flags;  // one per ambient factor when accepted
  std::string reject_reason;
};

/// Decides whether the given unital subalgebra of ⊕_j M_{r_j} is a nest
/// subalgebra, i.e. the full block-upper-triangular algebra of a flag in each
/// factor. The candidate flag is recovered from ranges of radical powers.
NestTestResult nest_subalgebra_test(const std::vector<BlockOperator>& algebra,
                                    const std::vector<Index>& ambient_dims,
                                    const Tolerance& tol);

struct PureBlock {
  Index outcome = 0;
  Index factor = 0;      // irrep index in the algebra spec
  Index nest_level = 0;  // position in the (outcome, factor) range chain
  Matrix embed;          // isometry H_b → H, k×m
  Matrix compression;    // isometry V_b: H_b → C^{d}, the pure block's dilation
};

struct NonProjectionWitness {
  Index outcome = 0;
  double eigenvalue = 0.0;
  Vector eigenvector;
};

struct CstarResult {
  bool cstar_extreme = false;
  std::string reject_reason;
  std::optional<NonProjectionWitness> witness;  // set on a spectrality rejection
  // Populated on acceptance:
  std::vector<PureBlock> blocks;
  Matrix global_unitary;  // k×k, rows grouped by block
};

/// Structure test on an arbitrary (unital) bi-dilation: invariance algebra,
/// nest-subalgebra test, then extraction of pure blocks from flag atoms with
/// the range-nesting check. Throws TheoryViolation if the nest test passes
/// but the extracted ranges fail to nest.
CstarResult cstar_structure(const BiDilation& dil, const Tolerance& tol);

/// C*-extremity of a unital CP map via its minimal Stinespring dilation.
CstarResult is_cstar_extreme_ucp(const CPMap& phi, const Tolerance& tol);

/// C*-extremity of a unital instrument: spectral POVM marginal, then the
/// per-outcome compressed CP blocks must each be C*-extreme.
CstarResult is_cstar_extreme_instrument(const Instrument& ins, const Tolerance& tol);

/// Cross-validation path: the nest machinery run directly on the full
/// bi-dilation of the instrument.
CstarResult cstar_nest_path(const Instrument& ins, const Tolerance& tol);

/// No nonzero intertwiner between the two spectral dilations.
bool spectral_disjointness(const BiDilation& a, const BiDilation& b, const Tolerance& tol);

bool cp_marginal_cstar_extreme(const Instrument& ins, const Tolerance& tol);

}  // namespace qiw
