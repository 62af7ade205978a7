#pragma once

#include "qiw/algebra.hpp"
#include "qiw/linalg.hpp"

namespace qiw {

/// A completely positive map Φ: ⊕_s M_{d_s} → M_k, stored as one Choi block
/// per factor: choi_s = Σ_pq E_pq ⊗ Φ_s(E_pq), a (d_s·k)×(d_s·k) matrix with
/// row index (p,u) = p·k + u. Φ is CP exactly when every block is PSD.
struct CPMap {
  AlgebraSpec spec;
  Index out_dim = 0;
  std::vector<Matrix> choi;

  CPMap() = default;
  CPMap(AlgebraSpec s, Index k, std::vector<Matrix> blocks);

  static CPMap zero(const AlgebraSpec& spec, Index k);

  CPMap operator+(const CPMap& rhs) const;
  CPMap operator-(const CPMap& rhs) const;
  CPMap operator*(double scale) const;

  double choi_norm() const;  // max block Frobenius norm
  bool is_zero(const Tolerance& tol) const;
};

/// Kraus operators per factor: Φ_s(a) = Σ_j K_j* a K_j with K_j of shape
/// d_s×k, mapping the output space into the factor. A minimal set has
/// linearly independent operators; its size per factor is rank(choi_s).
struct KrausSet {
  AlgebraSpec spec;
  Index out_dim = 0;
  std::vector<std::vector<Matrix>> ops;  // per factor
};

Matrix apply(const CPMap& phi, const AlgebraElement& a);

/// Normalization operator Φ(1), a k×k matrix.
Matrix apply_identity(const CPMap& phi);

bool validate_cp(const CPMap& phi, const Tolerance& tol);
bool is_unital(const CPMap& phi, const Tolerance& tol);

/// Minimal Kraus decomposition from the spectral decomposition of the Choi
/// blocks; K_j = unvec(conj(sqrt(λ_j)·u_j)). Throws NotCP.
KrausSet kraus_minimal(const CPMap& phi, const Tolerance& tol);

CPMap cpmap_from_kraus(const KrausSet& kraus);

/// Compression a ↦ W* Φ(a) W by an isometry W: C^k' → C^k (k×k' matrix).
CPMap compress(const CPMap& phi, const Matrix& w, const Tolerance& tol);

struct StinespringFactor {
  Index factor = 0;  // index into spec.block_dims
  Index d = 0;
  Index rank = 0;
  Index offset = 0;  // row offset of this d·rank block in the dilation space
};

/// Minimal Stinespring dilation on ⊕_s C^{d_s}⊗C^{r_s} with
/// π(a) = ⊕_s a_s ⊗ I_{r_s} and V built by stacking the minimal Kraus
/// operators, so that V*π(a)V = Φ(a).
struct Stinespring {
  AlgebraSpec spec;
  Index out_dim = 0;
  std::vector<StinespringFactor> factors;  // only factors with rank > 0
  Index total_dim = 0;
  Matrix V;  // total_dim × k

  Matrix rep(const AlgebraElement& a) const;
};

Stinespring stinespring_minimal(const CPMap& phi, const Tolerance& tol);

/// True iff the map is a compression of a single irrep: exactly one factor
/// carries Kraus rank 1 and all others are zero.
bool is_pure_cpmap(const CPMap& phi, const Tolerance& tol);

/// Multiplicativity on all matrix-unit pairs.
bool is_homomorphism(const CPMap& phi, const Tolerance& tol);

}  // namespace qiw
