#pragma once

#include "qiw/certificates.hpp"

namespace qiw {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct AnalysisOptions {
  Tolerance tol;
  uint64_t seed = 0;
  Index dominated_pair_trials = 200;
};

/// The full decision battery for one instrument. Predicates requiring
/// unitality are only populated when the instrument is normalized.
struct Analysis {
  ValidationReport validation;
  bool unital = false;
  ZeroEquivalence zeros;
  std::vector<std::vector<Index>> atom_list;
  bool commutative_range = false;
  bool povm_marginal_spectral = false;
  bool spectral = false;
  bool decomposable = false;
  DecomposabilityDefect defect;
  bool pure = false;
  DilationDims dims;
  Index commutant_dim = 0;
  DilationReport dilation_report;

  bool has_extremality = false;
  ExtremeResult extreme;
  CstarResult cstar;
  bool cstar_nest_agrees = false;
  bool cp_marginal_cstar = false;
  bool dominated_pairs_ok = false;

  std::vector<std::pair<std::string, Certificate>> certificates;
};

Analysis analyze(const Instrument& ins, const AnalysisOptions& options);

std::string analysis_report(const Analysis& analysis, const Instrument& ins,
                            const std::string& name, const AnalysisOptions& options,
                            bool as_json);

}  // namespace qiw
