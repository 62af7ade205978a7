#include <benchmark/benchmark.h>

#include "qiw/catalog.hpp"
#include "qiw/convexity.hpp"
#include "qiw/rng.hpp"

namespace {

using namespace qiw;

const Tolerance tol{};

// A unital instrument with n outcomes on M_d -> M_k, one Kraus per outcome.
Instrument random_instrument(Index d, Index k, Index n, uint64_t seed) {
  Rng rng(seed);
  AlgebraSpec spec{{d}};
  std::vector<CPMap> maps;
  Matrix total = Matrix::Zero(k, k);
  std::vector<Matrix> kraus_ops;
  for (Index i = 0; i < n; ++i) {
    Matrix op = rng.gaussian(d, k);
    total += op.adjoint() * op;
    kraus_ops.push_back(op);
  }
  Matrix root_inv = psd_sqrt(total, tol).inverse();
  for (Index i = 0; i < n; ++i) {
    KrausSet kraus;
    kraus.spec = spec;
    kraus.out_dim = k;
    kraus.ops = {{kraus_ops[static_cast<size_t>(i)] * root_inv}};
    maps.push_back(cpmap_from_kraus(kraus));
  }
  return Instrument(spec, k, std::move(maps));
}

void BM_MinimalBidilation(benchmark::State& state) {
  Instrument ins = random_instrument(state.range(0), state.range(0), 4, 7);
  for (auto _ : state) {
    BiDilation dil = minimal_bidilation(ins, tol);
    benchmark::DoNotOptimize(dil.V);
  }
}
BENCHMARK(BM_MinimalBidilation)->Arg(2)->Arg(4)->Arg(8);

void BM_IsExtreme(benchmark::State& state) {
  Instrument ins = random_instrument(state.range(0), state.range(0), 4, 7);
  for (auto _ : state) {
    ExtremeResult result = is_extreme(ins, tol);
    benchmark::DoNotOptimize(result.extreme);
  }
}
BENCHMARK(BM_IsExtreme)->Arg(2)->Arg(4)->Arg(8);

void BM_CstarExtreme(benchmark::State& state) {
  Instrument ins = diagonal_example();
  for (auto _ : state) {
    CstarResult result = is_cstar_extreme_instrument(ins, tol);
    benchmark::DoNotOptimize(result.cstar_extreme);
  }
}
BENCHMARK(BM_CstarExtreme);

void BM_RnRoundtrip(benchmark::State& state) {
  Instrument ins = luders_example(0.25);
  BiDilation dil = minimal_bidilation(ins, tol);
  Matrix d = 0.5 * Matrix::Identity(dil.total_dim, dil.total_dim);
  for (auto _ : state) {
    Instrument dominated = rn_apply(dil, d, tol);
    RNDerivative derivative = rn_derivative(dominated, dil, tol);
    benchmark::DoNotOptimize(derivative.residual);
  }
}
BENCHMARK(BM_RnRoundtrip);

}  // namespace

BENCHMARK_MAIN();
