#pragma once

#include "qiw/instrument.hpp"

namespace qiw {

struct DilationBlock {
  Index outcome = 0;
  Index factor = 0;
  Index d = 0;       // irrep dimension
  Index r = 0;       // Kraus rank of Φ_outcome restricted to the factor
  Index offset = 0;  // row offset of the d·r block in the dilation space
};

/// The minimal bi-dilation (K, π, E, V) in canonical block coordinates: one
/// C^{d_s}⊗C^{r_{i,s}} block per (outcome, factor) with nonzero Kraus rank,
/// π(a) = ⊕ a_s⊗I_r, E({i}) the projector onto the outcome-i blocks, and V
/// the stacked minimal Kraus operators. π and E are exact by construction;
/// only V carries numerical error.
struct BiDilation {
  AlgebraSpec spec;
  Index out_dim = 0;
  Index n_outcomes = 0;
  std::vector<DilationBlock> blocks;
  Index total_dim = 0;
  Matrix V;  // total_dim × out_dim

  Matrix pi(const AlgebraElement& a) const;
  Matrix spectral_projector(Index outcome) const;  // E({i})
  /// V*·π(a)·E({i})·V, the reconstructed instrument value.
  Matrix reconstruct(Index outcome, const AlgebraElement& a) const;
  /// Commutant dimension Σ r².
  Index commutant_dim() const;
};

BiDilation minimal_bidilation(const Instrument& ins, const Tolerance& tol);

struct DilationReport {
  double reconstruction_residual = 0.0;  // max over outcomes and basis elements
  double commutation_residual = 0.0;     // max ||[π(b), E({i})]||
  double spectrality_defect = 0.0;       // ||E_iE_j - δ_ij E_i|| and ||ΣE_i - I||
  Index minimality_dim = 0;              // dim span{π(b)E({i})V h}
  bool minimal = false;
  double isometry_defect = 0.0;          // ||V*V - I|| in operator norm
};

DilationReport verify_bidilation(const Instrument& ins, const BiDilation& dil,
                                 const Tolerance& tol);

/// Structured basis of {π(A)E(O(X))}' = ⊕_blocks I_d ⊗ M_r: per block the r×r
/// matrix units, embedded in the dilation space.
struct CommutantBasis {
  struct Entry {
    Index block = 0;  // index into BiDilation::blocks
    Index j = 0;      // unit ε_{jl} within the block's multiplicity space
    Index l = 0;
  };
  std::vector<Entry> entries;
  std::vector<Matrix> elements;  // aligned with entries, each total_dim × total_dim

  Index dimension() const { return static_cast<Index>(elements.size()); }
};

CommutantBasis commutant_basis(const BiDilation& dil);

/// A compressed corner of the bi-dilation: the subspace spanned by
/// π(A)V H (CP sub-minimal) or E(O(X))V H (POVM sub-minimal).
struct SubminimalDilation {
  Index dim = 0;
  Matrix basis;  // total_dim × dim, orthonormal columns
  BiDilation parent;

  Matrix rep(const AlgebraElement& a) const;  // compressed π
  Matrix effect(Index outcome) const;         // compressed E({i})
  Matrix compressed_v() const;                // dim × out_dim
  /// Compressed reconstruction V*·(PπP)(a)·(PEP)({i})·V.
  Matrix reconstruct(Index outcome, const AlgebraElement& a) const;
};

SubminimalDilation cp_subminimal(const BiDilation& dil, const Tolerance& tol);
SubminimalDilation povm_subminimal(const BiDilation& dil, const Tolerance& tol);

struct DilationDims {
  Index bi = 0;
  Index cp_sub = 0;
  Index povm_sub = 0;
};

DilationDims dilation_dims(const BiDilation& dil, const Tolerance& tol);

/// Decomposability criterion on the bi-dilation:
/// P₁E({i})P₁VV* = VV*P₁E({i})P₁VV* for all outcomes.
bool decomposable_dilation_criterion(const BiDilation& dil, const Tolerance& tol);

}  // namespace qiw
