#pragma once

#include "qiw/cpmap.hpp"

namespace qiw {

/// A positive-operator-valued measure on a finite outcome set: one PSD k×k
/// effect per outcome. Normalized when the effects sum to the identity.
struct Povm {
  Index out_dim = 0;
  std::vector<Matrix> effects;

  Index n_outcomes() const { return static_cast<Index>(effects.size()); }
  Matrix total() const;
  bool is_normalized(const Tolerance& tol) const;
  void check_shapes() const;
};

bool povm_validate(const Povm& povm, const Tolerance& tol);

/// All effects are projections (for normalized POVMs this makes the measure
/// spectral: projections summing to I are automatically orthogonal).
bool povm_spectral(const Povm& povm, const Tolerance& tol);

/// A quantum instrument on the outcome set {0,…,n-1}: one CP map per outcome,
/// all sharing the same algebra and output dimension. Outcome maps may be
/// zero. The normalized (unital) case satisfies Σ_i Φ_i(1) = I.
struct Instrument {
  AlgebraSpec spec;
  Index out_dim = 0;
  std::vector<CPMap> maps;

  Instrument() = default;
  Instrument(AlgebraSpec s, Index k, std::vector<CPMap> m);

  Index n_outcomes() const { return static_cast<Index>(maps.size()); }
  const CPMap& map(Index outcome) const { return maps[static_cast<size_t>(outcome)]; }
  double choi_norm() const;
};

struct OutcomeValidation {
  Index outcome = 0;
  double herm_defect = 0.0;     // max over factors of ||C - C*||
  double min_eigenvalue = 0.0;  // most negative Choi eigenvalue across factors
  bool cp_ok = true;
};

struct ValidationReport {
  std::vector<OutcomeValidation> outcomes;
  double normalization_defect = 0.0;  // ||Σ Φ_i(1) - I|| in operator norm
  bool require_unital = false;
  bool cp_pass = true;
  bool unital_pass = true;
  bool pass = false;
};

ValidationReport validate(const Instrument& ins, const Tolerance& tol, bool require_unital);

/// Σ_{i∈subset} Φ_i(a); outcomes are 0-based here.
Matrix value(const Instrument& ins, const std::vector<Index>& subset, const AlgebraElement& a);

Povm povm_marginal(const Instrument& ins);
CPMap cp_marginal(const Instrument& ins);

struct ZeroEquivalence {
  bool instrument_zero = false;
  bool povm_zero = false;
  bool cp_zero = false;
  bool agree() const { return instrument_zero == povm_zero && povm_zero == cp_zero; }
};

ZeroEquivalence zero_equivalence(const Instrument& ins, const Tolerance& tol);

/// Single-outcome instrument carrying the given CP map.
Instrument from_cpmap(const CPMap& phi);

/// The instrument I_μ(A)(a) = a·μ(A) over the trivial algebra C.
Instrument povm_as_instrument_trivial_algebra(const Povm& povm);

/// Closed form of the minimal-Naimark instrument of a normalized POVM over
/// C(X): algebra blocks (1,…,1) and Φ_i(a) = a_i·μ(i). Throws NotNormalized.
Instrument instrument_from_povm_naimark(const Povm& povm, const Tolerance& tol);

/// Φ_i(a) = μ(i)^{1/2}·a·μ(i)^{1/2} on the full algebra M_k. Throws NotPSD.
Instrument luders(const Povm& povm, const Tolerance& tol);

Instrument direct_sum(const std::vector<Instrument>& parts);

Instrument compress_instrument(const Instrument& ins, const Matrix& w, const Tolerance& tol);
Instrument unitary_conjugate(const Instrument& ins, const Matrix& u, const Tolerance& tol);

/// Σ_j T_j* I_j(·) T_j with Σ_j T_j*T_j = I. Throws CoefficientsNotNormalized.
Instrument cstar_convex_combine(const std::vector<Instrument>& parts,
                                const std::vector<Matrix>& coefficients, const Tolerance& tol);

/// Spectral instrument test: effects are mutually orthogonal projections, the
/// CP marginal is a *-homomorphism, and the product identity
/// Φ_i(a) = φ(a)μ(i) = μ(i)φ(a) holds on the matrix-unit basis.
bool is_spectral(const Instrument& ins, const Tolerance& tol);

/// Direct check that Φ_i(a) = φ(a)μ(i) on the basis.
bool is_decomposable(const Instrument& ins, const Tolerance& tol);

/// The (outcome, basis element) pair with the largest product-identity defect.
struct DecomposabilityDefect {
  Index outcome = 0;
  Index basis_index = 0;
  double defect = 0.0;
};
DecomposabilityDefect decomposability_defect(const Instrument& ins);

bool is_concentrated(const Instrument& ins, const std::vector<Index>& subset,
                     const Tolerance& tol);

/// Atoms of a finite-set instrument: the singletons of nonzero outcomes.
std::vector<std::vector<Index>> atoms(const Instrument& ins, const Tolerance& tol);

bool has_commutative_range(const Instrument& ins, const Tolerance& tol);

}  // namespace qiw
