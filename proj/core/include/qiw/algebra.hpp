#pragma once

#include <cstdint>
#include <vector>

#include "qiw/linalg.hpp"

namespace qiw {

/// A finite-dimensional C*-algebra in block-diagonal form ⊕_s M_{d_s}.
/// The full matrix algebra M_d is blocks={d}; the commutative algebra of
/// functions on an n-point set is blocks={1,...,1}.
struct AlgebraSpec {
  std::vector<Index> block_dims;

  Index num_factors() const { return static_cast<Index>(block_dims.size()); }
  Index total_dim() const;      // Σ d_s, the size of the embedded block-diagonal matrix
  Index dimension() const;      // Σ d_s², the linear dimension of the algebra
  Index block_offset(Index s) const;

  bool operator==(const AlgebraSpec& other) const { return block_dims == other.block_dims; }
  bool operator!=(const AlgebraSpec& other) const { return !(*this == other); }

  void check_valid() const;
};

/// An element of ⊕_s M_{d_s}, stored one block per factor.
struct AlgebraElement {
  AlgebraSpec spec;
  std::vector<Matrix> blocks;

  AlgebraElement() = default;
  AlgebraElement(AlgebraSpec s, std::vector<Matrix> b);

  AlgebraElement adjoint() const;
  AlgebraElement operator*(const AlgebraElement& rhs) const;
  AlgebraElement operator+(const AlgebraElement& rhs) const;
  AlgebraElement operator*(Complex scalar) const;
};

AlgebraElement identity(const AlgebraSpec& spec);

/// The Σ d_s² matrix units E_pq^(s), ordered by factor then row-major (p,q).
std::vector<AlgebraElement> matrix_unit_basis(const AlgebraSpec& spec);

/// Block-diagonal embedding into M_D, D = Σ d_s.
Matrix embed_full(const AlgebraElement& a);

/// The s-th irreducible representation: a ↦ a_s (0-based factor index).
Matrix irrep_apply(const AlgebraSpec& spec, Index s, const AlgebraElement& a);

/// Deterministic Hermitian element for property tests.
AlgebraElement random_hermitian(const AlgebraSpec& spec, uint64_t seed);

}  // namespace qiw
