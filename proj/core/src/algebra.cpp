#include "qiw/algebra.hpp"

#include "qiw/rng.hpp"

namespace qiw {

Index AlgebraSpec::total_dim() const {
  Index d = 0;
  for (Index b : block_dims) d += b;
  return d;
}

Index AlgebraSpec::dimension() const {
  Index d = 0;
  for (Index b : block_dims) d += b * b;
  return d;
}

Index AlgebraSpec::block_offset(Index s) const {
  Index off = 0;
  for (Index t = 0; t < s; ++t) off += block_dims[static_cast<size_t>(t)];
  return off;
}

void AlgebraSpec::check_valid() const {
  if (block_dims.empty())
    throw Error(ErrorCode::ShapeMismatch, "AlgebraSpec: at least one factor required");
  for (Index b : block_dims)
    if (b < 1) throw Error(ErrorCode::ShapeMismatch, "AlgebraSpec: factor dimensions must be >= 1");
}

AlgebraElement::AlgebraElement(AlgebraSpec s, std::vector<Matrix> b)
    : spec(std::move(s)), blocks(std::move(b)) {
  spec.check_valid();
  if (static_cast<Index>(blocks.size()) != spec.num_factors())
    throw Error(ErrorCode::ShapeMismatch, "AlgebraElement: block count mismatch");
  for (Index s_i = 0; s_i < spec.num_factors(); ++s_i) {
    const Matrix& m = blocks[static_cast<size_t>(s_i)];
    const Index d = spec.block_dims[static_cast<size_t>(s_i)];
    if (m.rows() != d || m.cols() != d)
      throw Error(ErrorCode::ShapeMismatch, "AlgebraElement: block shape mismatch");
    if (!is_finite(m))
      throw Error(ErrorCode::ShapeMismatch, "AlgebraElement: non-finite entries");
  }
}

AlgebraElement AlgebraElement::adjoint() const {
  AlgebraElement out = *this;
  for (Matrix& b : out.blocks) b = b.adjoint().eval();
  return out;
}

AlgebraElement AlgebraElement::operator*(const AlgebraElement& rhs) const {
  if (spec != rhs.spec) throw Error(ErrorCode::SpecMismatch, "AlgebraElement: spec mismatch");
  AlgebraElement out = *this;
  for (size_t s = 0; s < blocks.size(); ++s) out.blocks[s] = blocks[s] * rhs.blocks[s];
  return out;
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& rhs) const {
  if (spec != rhs.spec) throw Error(ErrorCode::SpecMismatch, "AlgebraElement: spec mismatch");
  AlgebraElement out = *this;
  for (size_t s = 0; s < blocks.size(); ++s) out.blocks[s] = blocks[s] + rhs.blocks[s];
  return out;
}

AlgebraElement AlgebraElement::operator*(Complex scalar) const {
  AlgebraElement out = *this;
  for (Matrix& b : out.blocks) b *= scalar;
  return out;
}

AlgebraElement identity(const AlgebraSpec& spec) {
  spec.check_valid();
  std::vector<Matrix> blocks;
  blocks.reserve(spec.block_dims.size());
  for (Index d : spec.block_dims) blocks.push_back(Matrix::Identity(d, d));
  return AlgebraElement(spec, std::move(blocks));
}

std::vector<AlgebraElement> matrix_unit_basis(const AlgebraSpec& spec) {
  spec.check_valid();
  std::vector<AlgebraElement> basis;
  basis.reserve(static_cast<size_t>(spec.dimension()));
  for (Index s = 0; s < spec.num_factors(); ++s) {
    const Index d = spec.block_dims[static_cast<size_t>(s)];
    for (Index p = 0; p < d; ++p) {
      for (Index q = 0; q < d; ++q) {
        std::vector<Matrix> blocks;
        for (Index t = 0; t < spec.num_factors(); ++t) {
          const Index dt = spec.block_dims[static_cast<size_t>(t)];
          blocks.push_back(Matrix::Zero(dt, dt));
        }
        blocks[static_cast<size_t>(s)](p, q) = Complex(1, 0);
        basis.emplace_back(spec, std::move(blocks));
      }
    }
  }
  return basis;
}

Matrix embed_full(const AlgebraElement& a) {
  const Index total = a.spec.total_dim();
  Matrix out = Matrix::Zero(total, total);
  Index off = 0;
  for (size_t s = 0; s < a.blocks.size(); ++s) {
    const Index d = a.spec.block_dims[s];
    out.block(off, off, d, d) = a.blocks[s];
    off += d;
  }
  return out;
}

Matrix irrep_apply(const AlgebraSpec& spec, Index s, const AlgebraElement& a) {
  if (a.spec != spec) throw Error(ErrorCode::SpecMismatch, "irrep_apply: spec mismatch");
  if (s < 0 || s >= spec.num_factors())
    throw Error(ErrorCode::ShapeMismatch, "irrep_apply: factor index out of range");
  return a.blocks[static_cast<size_t>(s)];
}

AlgebraElement random_hermitian(const AlgebraSpec& spec, uint64_t seed) {
  spec.check_valid();
  Rng rng(seed);
  std::vector<Matrix> blocks;
  blocks.reserve(spec.block_dims.size());
  for (Index d : spec.block_dims) blocks.push_back(rng.hermitian(d));
  return AlgebraElement(spec, std::move(blocks));
}

}  // namespace qiw
