#include <doctest.h>

#include "corpus.hpp"
#include "oracles.hpp"
#include "qiw/catalog.hpp"
#include "qiw/dilation.hpp"
#include "qiw/rng.hpp"

using namespace qiw;

namespace {

const Tolerance tol{};

Matrix unit2(Index p, Index q) {
  Matrix m = Matrix::Zero(2, 2);
  m(p, q) = 1;
  return m;
}

Instrument identity_channel_instrument(Index d) {
  KrausSet kraus;
  kraus.spec = AlgebraSpec{{d}};
  kraus.out_dim = d;
  kraus.ops = {{Matrix::Identity(d, d)}};
  return from_cpmap(cpmap_from_kraus(kraus));
}

}  // namespace

TEST_CASE("validate") {
  Instrument luders = luders_example(0.25);
  CHECK(validate(luders, tol, true).pass);

  // Doubling the second outcome leaves a normalization defect of 3/4.
  std::vector<CPMap> maps = {luders.map(0), luders.map(1) * 2.0};
  Instrument doubled(luders.spec, 2, std::move(maps));
  ValidationReport report = validate(doubled, tol, true);
  CHECK(report.cp_pass);
  CHECK_FALSE(report.pass);
  CHECK(report.normalization_defect == doctest::Approx(0.75));

  Instrument zero(luders.spec, 2, {CPMap::zero(luders.spec, 2), CPMap::zero(luders.spec, 2)});
  CHECK_FALSE(validate(zero, tol, true).pass);
  CHECK(validate(zero, tol, false).pass);
}

TEST_CASE("value over subsets") {
  Instrument luders = luders_example(0.25);
  AlgebraElement one = identity(luders.spec);
  CHECK(fro_norm(value(luders, {}, one)) == 0.0);
  CHECK(fro_norm(value(luders, {0, 1}, one) - Matrix::Identity(2, 2)) < 1e-12);
  Matrix mu1 = Matrix::Zero(2, 2);
  mu1(0, 0) = 0.25;
  mu1(1, 1) = 0.75;
  CHECK(fro_norm(value(luders, {0}, one) - mu1) < 1e-12);
}

TEST_CASE("marginals") {
  Instrument luders = luders_example(0.3);
  Povm mu = povm_marginal(luders);
  Matrix mu1 = Matrix::Zero(2, 2);
  mu1(0, 0) = 0.3;
  mu1(1, 1) = 0.7;
  CHECK(fro_norm(mu.effects[0] - mu1) < 1e-12);
  CHECK(mu.is_normalized(tol));

  Povm diag_mu = povm_marginal(diagonal_example());
  CHECK(fro_norm(diag_mu.effects[0] - unit2(0, 0)) < 1e-12);
  CHECK(fro_norm(diag_mu.effects[1] - unit2(1, 1)) < 1e-12);

  Instrument single = identity_channel_instrument(2);
  CHECK(fro_norm(povm_marginal(single).effects[0] - Matrix::Identity(2, 2)) < 1e-12);

  // CP marginal of the Luders pair at t = 1/4 on E12.
  CPMap phi = cp_marginal(luders_example(0.25));
  AlgebraElement e12(AlgebraSpec{{2}}, {unit2(0, 1)});
  CHECK(fro_norm(apply(phi, e12) - (std::sqrt(3.0) / 2.0) * unit2(0, 1)) < 1e-12);

  // Marginal consistency: μ(i) = Φ_i(1) and Σ μ(i) = (Σ Φ_i)(1).
  for (uint64_t seed = 44; seed <= 48; ++seed) {
    Instrument ins = qiw::testing::random_unital_instrument(seed);
    Povm marginal = povm_marginal(ins);
    Matrix total = Matrix::Zero(ins.out_dim, ins.out_dim);
    for (Index i = 0; i < ins.n_outcomes(); ++i) {
      CHECK(fro_norm(marginal.effects[static_cast<size_t>(i)] - apply_identity(ins.map(i))) ==
            0.0);
      total += marginal.effects[static_cast<size_t>(i)];
    }
    CHECK(fro_norm(total - apply_identity(cp_marginal(ins))) < 1e-12);
  }
}

TEST_CASE("zero_equivalence") {
  AlgebraSpec spec{{2}};
  Instrument zero(spec, 2, {CPMap::zero(spec, 2), CPMap::zero(spec, 2)});
  ZeroEquivalence z = zero_equivalence(zero, tol);
  CHECK(z.instrument_zero);
  CHECK(z.agree());

  ZeroEquivalence l = zero_equivalence(luders_example(0.25), tol);
  CHECK_FALSE(l.instrument_zero);
  CHECK(l.agree());

  for (uint64_t seed = 1; seed <= 10; ++seed)
    CHECK(zero_equivalence(qiw::testing::random_unital_instrument(seed), tol).agree());
}

TEST_CASE("from_cpmap keeps marginals") {
  Instrument single = identity_channel_instrument(3);
  CHECK(single.n_outcomes() == 1);
  CHECK(validate(single, tol, true).pass);
  CHECK(fro_norm(cp_marginal(single).choi[0] - single.map(0).choi[0]) == 0.0);
}

TEST_CASE("povm_as_instrument_trivial_algebra") {
  Instrument ins = povm_as_instrument_trivial_algebra(omega_povm());
  CHECK(ins.n_outcomes() == 4);
  CHECK(ins.spec.block_dims == std::vector<Index>{1});
  CHECK(validate(ins, tol, true).pass);
  Povm mu = povm_marginal(ins);
  Povm original = omega_povm();
  for (size_t i = 0; i < 4; ++i) CHECK(fro_norm(mu.effects[i] - original.effects[i]) < 1e-12);
}

TEST_CASE("instrument_from_povm_naimark") {
  Povm omega = omega_povm();
  Instrument ins = instrument_from_povm_naimark(omega, tol);
  CHECK(ins.spec.num_factors() == 4);
  CHECK(validate(ins, tol, true).pass);

  // Φ_i(a) = a_i μ(i): evaluate on the indicator of point i.
  const auto units = matrix_unit_basis(ins.spec);
  for (Index i = 0; i < 4; ++i) {
    Matrix got = apply(ins.map(i), units[static_cast<size_t>(i)]);
    CHECK(fro_norm(got - omega.effects[static_cast<size_t>(i)]) < 1e-12);
    // Other points contribute nothing at outcome i.
    for (Index j = 0; j < 4; ++j)
      if (j != i) CHECK(fro_norm(apply(ins.map(i), units[static_cast<size_t>(j)])) < 1e-12);
  }
  // CP marginal: a ↦ Σ a_i μ(i).
  CPMap phi = cp_marginal(ins);
  for (Index j = 0; j < 4; ++j)
    CHECK(fro_norm(apply(phi, units[static_cast<size_t>(j)]) -
                   omega.effects[static_cast<size_t>(j)]) < 1e-12);

  // Spectral input POVM gives a decomposable output.
  Povm projective;
  projective.out_dim = 2;
  projective.effects = {unit2(0, 0), unit2(1, 1)};
  CHECK(is_decomposable(instrument_from_povm_naimark(projective, tol), tol));

  Povm subnormalized;
  subnormalized.out_dim = 2;
  subnormalized.effects = {0.5 * unit2(0, 0)};
  CHECK_THROWS_AS(instrument_from_povm_naimark(subnormalized, tol), Error);
}

TEST_CASE("luders construction") {
  Instrument family = luders_example(0.25);
  KrausSet kraus = kraus_minimal(family.map(0), tol);
  REQUIRE(kraus.ops[0].size() == 1);

  // A trivial POVM {I} gives the identity channel.
  Povm trivial;
  trivial.out_dim = 2;
  trivial.effects = {Matrix::Identity(2, 2)};
  Instrument channel = luders(trivial, tol);
  AlgebraElement a = random_hermitian(channel.spec, 5);
  CHECK(fro_norm(apply(channel.map(0), a) - a.blocks[0]) < 1e-12);

  // Projective POVM: the POVM marginal is spectral.
  Povm projective;
  projective.out_dim = 2;
  projective.effects = {unit2(0, 0), unit2(1, 1)};
  CHECK(povm_spectral(povm_marginal(luders(projective, tol)), tol));

  // Non-PSD effects are rejected by the square root.
  Povm bad;
  bad.out_dim = 2;
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1;
  neg(1, 1) = -0.5;
  bad.effects = {neg};
  CHECK_THROWS_AS(luders(bad, tol), Error);
}

TEST_CASE("direct_sum") {
  Instrument a = identity_channel_instrument(2);
  Instrument sum = direct_sum({a, a});
  CHECK(sum.out_dim == 4);
  CHECK(validate(sum, tol, true).pass);

  // Marginals distribute over the direct sum.
  Instrument x = qiw::testing::random_unital_instrument(11);
  Instrument y = qiw::testing::random_unital_instrument(12);
  // Rebuild y on the same spec and outcome count as x when they differ.
  if (!(x.spec == y.spec) || x.n_outcomes() != y.n_outcomes()) {
    y = x;
  }
  Instrument both = direct_sum({x, y});
  const auto units = matrix_unit_basis(x.spec);
  for (Index i = 0; i < x.n_outcomes(); ++i)
    for (const auto& b : units) {
      Matrix block = apply(both.map(i), b);
      CHECK(fro_norm(block.topLeftCorner(x.out_dim, x.out_dim) - apply(x.map(i), b)) < 1e-12);
      CHECK(fro_norm(block.bottomRightCorner(y.out_dim, y.out_dim) - apply(y.map(i), b)) < 1e-12);
      CHECK(fro_norm(block.topRightCorner(x.out_dim, y.out_dim)) < 1e-12);
    }
}

TEST_CASE("compression and conjugation") {
  Instrument id4 = identity_channel_instrument(4);
  Matrix w = Matrix::Zero(4, 2);
  w(0, 0) = 1;
  w(1, 1) = 1;
  Instrument corner = compress_instrument(id4, w, tol);
  CHECK(corner.out_dim == 2);
  AlgebraElement a = random_hermitian(id4.spec, 9);
  CHECK(fro_norm(apply(corner.map(0), a) - a.blocks[0].topLeftCorner(2, 2)) < 1e-12);

  Instrument same = unitary_conjugate(id4, Matrix::Identity(4, 4), tol);
  CHECK(fro_norm(same.map(0).choi[0] - id4.map(0).choi[0]) < 1e-12);
  CHECK_THROWS_AS(unitary_conjugate(id4, 2.0 * Matrix::Identity(4, 4), tol), Error);

  // Conjugation preserves the predicate battery.
  Instrument base = luders_example(0.25);
  Rng rng(17);
  Instrument conj = unitary_conjugate(base, rng.unitary(2), tol);
  CHECK(is_decomposable(base, tol) == is_decomposable(conj, tol));
  CHECK(is_spectral(base, tol) == is_spectral(conj, tol));
  CHECK(has_commutative_range(base, tol) == has_commutative_range(conj, tol));
  CHECK(atoms(base, tol) == atoms(conj, tol));
}

TEST_CASE("cstar_convex_combine") {
  Instrument base = luders_example(0.25);
  Instrument same = cstar_convex_combine({base}, {Matrix::Identity(2, 2)}, tol);
  CHECK(fro_norm(same.map(0).choi[0] - base.map(0).choi[0]) < 1e-12);

  // Scalar coefficients produce the classical mixture.
  Instrument other = luders_example(0.75);
  double t = 0.3;
  Instrument mix = cstar_convex_combine(
      {base, other},
      {std::sqrt(t) * Matrix::Identity(2, 2), std::sqrt(1 - t) * Matrix::Identity(2, 2)}, tol);
  for (Index i = 0; i < 2; ++i)
    CHECK(fro_norm(mix.map(i).choi[0] -
                   (t * base.map(i).choi[0] + (1 - t) * other.map(i).choi[0])) < 1e-12);

  // Random valid combinations stay valid and unital.
  Rng rng(23);
  Matrix g = rng.gaussian(2, 2);
  Matrix t1 = psd_sqrt(Matrix::Identity(2, 2) - (g * g.adjoint()) * (1.0 / (1.0 + op_norm(g * g.adjoint()))), tol);
  Matrix t2 = psd_sqrt(Matrix::Identity(2, 2) - t1 * t1, tol);
  Instrument combo = cstar_convex_combine({base, other}, {t1, t2}, tol);
  CHECK(validate(combo, tol, true).pass);

  CHECK_THROWS_AS(cstar_convex_combine({base, other},
                                       {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}, tol),
                  Error);
}

TEST_CASE("is_spectral") {
  CHECK_FALSE(is_spectral(diagonal_example(), tol));  // CP marginal not multiplicative
  CHECK_FALSE(is_spectral(luders_example(0.25), tol));

  // Two-outcome instrument concentrated on outcome 1 with the identity map.
  AlgebraSpec spec{{2}};
  KrausSet kraus;
  kraus.spec = spec;
  kraus.out_dim = 2;
  kraus.ops = {{Matrix::Identity(2, 2)}};
  Instrument conc(spec, 2, {cpmap_from_kraus(kraus), CPMap::zero(spec, 2)});
  CHECK(is_spectral(conc, tol));

  // Agreement with the direct definition on structured and random instances.
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    Instrument spectral = qiw::testing::random_spectral_instrument(seed);
    CHECK(is_spectral(spectral, tol));
    CHECK(qiw::oracles::spectral_direct(spectral, tol));
    Instrument random = qiw::testing::random_unital_instrument(seed);
    CHECK(is_spectral(random, tol) == qiw::oracles::spectral_direct(random, tol));
  }
}

TEST_CASE("is_decomposable") {
  // Lüders t=1/4 fails on E12: sqrt(3)/4 vs 3*sqrt(3)/8.
  Instrument luders_quarter = luders_example(0.25);
  CHECK_FALSE(is_decomposable(luders_quarter, tol));
  AlgebraElement e12(luders_quarter.spec, {unit2(0, 1)});
  Matrix lhs = apply(luders_quarter.map(0), e12);
  Matrix rhs = apply(cp_marginal(luders_quarter), e12) * povm_marginal(luders_quarter).effects[0];
  CHECK(fro_norm(lhs) == doctest::Approx(std::sqrt(3.0) / 4.0));
  CHECK(fro_norm(rhs) == doctest::Approx(3.0 * std::sqrt(3.0) / 8.0));

  CHECK_FALSE(is_decomposable(omega_naimark_example(), tol));
  CHECK(is_decomposable(diagonal_example(), tol));  // spectral POVM marginal

  // Agreement with the bi-dilation criterion.
  for (const auto& instance : qiw::testing::build_corpus()) {
    if (instance.name.rfind("random-", 0) == 0 &&
        instance.name != "random-1" && instance.name != "random-2" &&
        instance.name != "random-3" && instance.name != "random-4")
      continue;  // a sample is enough here; the acceptance suite covers the rest
    BiDilation dil = minimal_bidilation(instance.ins, tol);
    CHECK(is_decomposable(instance.ins, tol) == decomposable_dilation_criterion(dil, tol));
  }
}

TEST_CASE("is_concentrated and atoms") {
  Instrument single = identity_channel_instrument(2);
  CHECK(is_concentrated(single, {0}, tol));

  Instrument luders = luders_example(0.25);
  CHECK_FALSE(is_concentrated(luders, {0}, tol));
  CHECK(is_concentrated(luders, {0, 1}, tol));
  CHECK(atoms(luders, tol) == std::vector<std::vector<Index>>{{0}, {1}});

  AlgebraSpec spec{{2}};
  Instrument zero(spec, 2, {CPMap::zero(spec, 2), CPMap::zero(spec, 2)});
  CHECK(atoms(zero, tol).empty());

  // Atoms agree with the nonzero outcome blocks of the bi-dilation.
  for (uint64_t seed = 31; seed <= 36; ++seed) {
    Instrument ins = qiw::testing::random_unital_instrument(seed);
    BiDilation dil = minimal_bidilation(ins, tol);
    std::vector<std::vector<Index>> expected;
    for (Index i = 0; i < ins.n_outcomes(); ++i)
      for (const DilationBlock& b : dil.blocks)
        if (b.outcome == i) {
          expected.push_back({i});
          break;
        }
    CHECK(atoms(ins, tol) == expected);
  }
}

TEST_CASE("has_commutative_range") {
  CHECK(has_commutative_range(diagonal_example(), tol));
  CHECK_FALSE(has_commutative_range(identity_channel_instrument(2), tol));
  // The Lüders values at distinct outcomes do not commute: the outcome-1
  // image of E12 and the outcome-2 image of E21 are multiples of E12 and E21.
  CHECK_FALSE(has_commutative_range(luders_example(0.25), tol));
}
