#pragma once

#include <string>

#include "qiw/instrument.hpp"

namespace qiw::testing {

struct CorpusInstance {
  std::string name;
  Instrument ins;
  bool unital = true;
  bool small = false;  // d, k, n all ≤ 3, for the heavier oracle checks
};

/// Deterministic corpus: ≥ 200 seeded random unital instruments over algebras
/// with d_s ≤ 3 and S ≤ 2, output dimension ≤ 4 and ≤ 4 outcomes, plus
/// structured families (spectral, Lüders, Naimark, nested-compression sums,
/// conjugates, concentrated and scaled instances).
std::vector<CorpusInstance> build_corpus();

/// Random unital instrument for one seed; exposed for targeted tests.
Instrument random_unital_instrument(uint64_t seed);

/// Random spectral instrument (product of a *-homomorphism and a spectral
/// measure in a common block structure).
Instrument random_spectral_instrument(uint64_t seed);

/// Direct sum of nested compressions of one irrep, concentrated on single
/// outcomes: C*-extreme by construction.
Instrument nested_compression_instrument(uint64_t seed);

}  // namespace qiw::testing
