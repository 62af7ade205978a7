#include <doctest.h>

#include "qiw/catalog.hpp"
#include "qiw/cpmap.hpp"
#include "qiw/rng.hpp"

using namespace qiw;

namespace {

const Tolerance tol{};

CPMap identity_map(Index d) {
  KrausSet kraus;
  kraus.spec = AlgebraSpec{{d}};
  kraus.out_dim = d;
  kraus.ops = {{Matrix::Identity(d, d)}};
  return cpmap_from_kraus(kraus);
}

CPMap diagonal_part_map() {
  KrausSet kraus;
  kraus.spec = AlgebraSpec{{2}};
  kraus.out_dim = 2;
  Matrix e11 = Matrix::Zero(2, 2), e22 = Matrix::Zero(2, 2);
  e11(0, 0) = 1;
  e22(1, 1) = 1;
  kraus.ops = {{e11, e22}};
  return cpmap_from_kraus(kraus);
}

CPMap random_cp(uint64_t seed, Index max_dim = 4) {
  Rng rng(seed);
  AlgebraSpec spec{{rng.pick(1, max_dim)}};
  if (rng.pick(0, 1)) spec.block_dims.push_back(rng.pick(1, max_dim));
  const Index k = rng.pick(1, max_dim);
  KrausSet kraus;
  kraus.spec = spec;
  kraus.out_dim = k;
  for (Index s = 0; s < spec.num_factors(); ++s) {
    std::vector<Matrix> ops;
    for (Index j = 0, count = rng.pick(0, 2); j < count; ++j)
      ops.push_back(rng.gaussian(spec.block_dims[static_cast<size_t>(s)], k));
    kraus.ops.push_back(std::move(ops));
  }
  return cpmap_from_kraus(kraus);
}

Matrix unit2(Index p, Index q) {
  Matrix m = Matrix::Zero(2, 2);
  m(p, q) = 1;
  return m;
}

}  // namespace

TEST_CASE("apply reproduces the Luders outcome map") {
  Instrument luders = luders_example(0.25);
  const CPMap& phi1 = luders.map(0);
  AlgebraElement e12(luders.spec, {unit2(0, 1)});
  Matrix expect = (std::sqrt(3.0) / 4.0) * unit2(0, 1);
  CHECK(fro_norm(apply(phi1, e12) - expect) < 1e-12);

  AlgebraElement one = identity(luders.spec);
  Matrix mu1 = Matrix::Zero(2, 2);
  mu1(0, 0) = 0.25;
  mu1(1, 1) = 0.75;
  CHECK(fro_norm(apply(phi1, one) - mu1) < 1e-12);
}

TEST_CASE("apply of the zero map vanishes") {
  CPMap zero = CPMap::zero(AlgebraSpec{{2}}, 3);
  CHECK(fro_norm(apply(zero, identity(zero.spec))) == 0.0);
  CHECK(zero.is_zero(tol));
}

TEST_CASE("validate_cp accepts Kraus-built maps and rejects the transpose map") {
  for (uint64_t seed = 1; seed <= 8; ++seed) CHECK(validate_cp(random_cp(seed), tol));

  // Choi of the transpose on M_2 is the swap matrix, with eigenvalue -1.
  AlgebraSpec spec{{2}};
  Matrix swap = Matrix::Zero(4, 4);
  for (Index p = 0; p < 2; ++p)
    for (Index q = 0; q < 2; ++q) swap(p * 2 + q, q * 2 + p) = 1;
  CPMap transpose(spec, 2, {swap});
  CHECK_FALSE(validate_cp(transpose, tol));
  CHECK(validate_cp(CPMap::zero(spec, 2), tol));
}

TEST_CASE("is_unital") {
  CHECK(is_unital(identity_map(3), tol));
  CHECK_FALSE(is_unital(identity_map(3) * 0.5, tol));
  CHECK(is_unital(diagonal_part_map(), tol));
}

TEST_CASE("kraus_minimal recovers canonical operators") {
  Instrument luders = luders_example(0.25);
  KrausSet kraus = kraus_minimal(luders.map(0), tol);
  REQUIRE(kraus.ops[0].size() == 1);
  Matrix root = Matrix::Zero(2, 2);
  root(0, 0) = 0.5;
  root(1, 1) = std::sqrt(3.0) / 2.0;
  // Single Kraus operator, up to phase.
  Matrix got = kraus.ops[0][0];
  Complex phase = got(0, 0) / std::abs(got(0, 0));
  CHECK(fro_norm(got / phase - root) < 1e-10);

  KrausSet diag = kraus_minimal(diagonal_part_map(), tol);
  REQUIRE(diag.ops[0].size() == 2);

  KrausSet id = kraus_minimal(identity_map(3), tol);
  REQUIRE(id.ops[0].size() == 1);
  Matrix k0 = id.ops[0][0];
  Complex phase0 = k0(0, 0) / std::abs(k0(0, 0));
  CHECK(fro_norm(k0 / phase0 - Matrix::Identity(3, 3)) < 1e-10);
}

TEST_CASE("kraus round trip reconstructs the Choi blocks") {
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    CPMap phi = random_cp(seed);
    KrausSet kraus = kraus_minimal(phi, tol);
    CPMap rebuilt = cpmap_from_kraus(kraus);
    for (size_t s = 0; s < phi.choi.size(); ++s) {
      CHECK(fro_norm(rebuilt.choi[s] - phi.choi[s]) <=
            tol.eps * std::max(1.0, fro_norm(phi.choi[s])) * 100);
      // Minimal ranks match the Choi ranks.
      CHECK(static_cast<Index>(kraus.ops[s].size()) == matrix_rank(phi.choi[s], tol));
    }
  }
}

TEST_CASE("minimal Kraus sets are unique up to unitary recombination") {
  CPMap phi = random_cp(5);
  KrausSet a = kraus_minimal(phi, tol);
  // Recombine with a random unitary; the recombined set presents the same map
  // and spans the same operator space per factor.
  Rng rng(99);
  KrausSet b = a;
  for (size_t s = 0; s < a.ops.size(); ++s) {
    const Index r = static_cast<Index>(a.ops[s].size());
    if (r == 0) continue;
    Matrix u = rng.unitary(r);
    for (Index j = 0; j < r; ++j) {
      Matrix combo = Matrix::Zero(a.ops[s][0].rows(), a.ops[s][0].cols());
      for (Index l = 0; l < r; ++l) combo += u(j, l) * a.ops[s][static_cast<size_t>(l)];
      b.ops[s][static_cast<size_t>(j)] = combo;
    }
  }
  CPMap rebuilt = cpmap_from_kraus(b);
  for (size_t s = 0; s < phi.choi.size(); ++s)
    CHECK(fro_norm(rebuilt.choi[s] - phi.choi[s]) < 1e-9 * std::max(1.0, fro_norm(phi.choi[s])));

  for (size_t s = 0; s < a.ops.size(); ++s) {
    std::vector<Vector> va, vb;
    for (const Matrix& op : a.ops[s]) va.push_back(vec_rm(op));
    for (const Matrix& op : b.ops[s]) vb.push_back(vec_rm(op));
    auto ba = orthonormalize(va, tol), bb = orthonormalize(vb, tol);
    REQUIRE(ba.size() == bb.size());
    for (const Vector& v : va) {
      Vector resid = v;
      for (const Vector& w : bb) resid -= w * w.dot(resid);
      CHECK(resid.norm() < 1e-9 * std::max(1.0, v.norm()));
    }
  }
}

TEST_CASE("compress") {
  CPMap id4 = identity_map(4);
  Matrix w = Matrix::Zero(4, 2);
  w(0, 0) = 1;
  w(1, 1) = 1;
  CPMap corner = compress(id4, w, tol);
  CHECK(corner.out_dim == 2);
  // The corner map keeps the top-left 2×2 block.
  AlgebraElement a = random_hermitian(id4.spec, 3);
  Matrix expect = a.blocks[0].topLeftCorner(2, 2);
  CHECK(fro_norm(apply(corner, a) - expect) < 1e-12);
  CHECK(is_unital(corner, tol));

  CHECK(fro_norm(apply(compress(id4, Matrix::Identity(4, 4), tol), a) - a.blocks[0]) < 1e-12);
  CHECK_THROWS_AS(compress(id4, 2.0 * w, tol), Error);
}

TEST_CASE("stinespring_minimal") {
  // Pure state a ↦ a_00 on M_2: rank one, V = e_1.
  AlgebraSpec spec{{2}};
  KrausSet kraus;
  kraus.spec = spec;
  kraus.out_dim = 1;
  Matrix e1 = Matrix::Zero(2, 1);
  e1(0, 0) = 1;
  kraus.ops = {{e1}};
  CPMap state = cpmap_from_kraus(kraus);
  Stinespring st = stinespring_minimal(state, tol);
  REQUIRE(st.factors.size() == 1);
  CHECK(st.factors[0].rank == 1);
  CHECK(st.total_dim == 2);
  CHECK(std::abs(std::abs(st.V(0, 0)) - 1.0) < 1e-12);

  Stinespring id = stinespring_minimal(identity_map(2), tol);
  CHECK(id.total_dim == 2);

  Stinespring diag = stinespring_minimal(diagonal_part_map(), tol);
  CHECK(diag.total_dim == 4);  // rank-2 Choi over a single factor: C^2 ⊗ C^2

  // Reconstruction on the basis.
  for (uint64_t seed = 21; seed <= 26; ++seed) {
    CPMap phi = random_cp(seed, 3);
    Stinespring s = stinespring_minimal(phi, tol);
    const auto basis = matrix_unit_basis(phi.spec);
    double scale = std::max(1.0, phi.choi_norm());
    for (const auto& b : basis) {
      Matrix lhs = s.V.adjoint() * s.rep(b) * s.V;
      CHECK(fro_norm(lhs - apply(phi, b)) <= 100 * tol.eps * scale);
    }
    // Minimality: span{rep(b) V h} is the whole dilation space.
    Matrix stacked(s.total_dim, static_cast<Index>(basis.size()) * phi.out_dim);
    Index col = 0;
    for (const auto& b : basis) {
      stacked.block(0, col, s.total_dim, phi.out_dim) = s.rep(b) * s.V;
      col += phi.out_dim;
    }
    CHECK(matrix_rank(stacked, tol) == s.total_dim);
  }
}

TEST_CASE("is_pure_cpmap") {
  AlgebraSpec spec{{3}};
  KrausSet kraus;
  kraus.spec = spec;
  kraus.out_dim = 2;
  Rng rng(8);
  Matrix w = rng.unitary(3).leftCols(2);
  kraus.ops = {{w}};
  CHECK(is_pure_cpmap(cpmap_from_kraus(kraus), tol));
  CHECK_FALSE(is_pure_cpmap(diagonal_part_map(), tol));
  CHECK_FALSE(is_pure_cpmap(CPMap::zero(spec, 2), tol));
}

TEST_CASE("is_homomorphism") {
  CHECK(is_homomorphism(identity_map(2), tol));
  Instrument luders = luders_example(0.25);
  CHECK_FALSE(is_homomorphism(luders.map(0), tol));

  // Irrep evaluation a ↦ a_s is a homomorphism.
  AlgebraSpec spec{{2, 3}};
  std::vector<Matrix> blocks;
  blocks.push_back(Matrix::Zero(2 * 2, 2 * 2));
  blocks.push_back(Matrix::Zero(3 * 2, 3 * 2));
  CPMap irrep(spec, 2, blocks);
  // Choi of a ↦ a_0: C[(p,u),(q,v)] = E_pq[u,v].
  for (Index p = 0; p < 2; ++p)
    for (Index q = 0; q < 2; ++q) irrep.choi[0](p * 2 + p, q * 2 + q) = 1;
  CHECK(is_homomorphism(irrep, tol));
}
