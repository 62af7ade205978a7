#include "qiw/analysis.hpp"

#include <sstream>

#include "qiw/io.hpp"

namespace qiw {

Analysis analyze(const Instrument& ins, const AnalysisOptions& options) {
  const Tolerance& tol = options.tol;
  Analysis out;
  out.validation = validate(ins, tol, false);
  out.unital = out.validation.unital_pass;
  out.zeros = zero_equivalence(ins, tol);
  out.atom_list = atoms(ins, tol);
  out.commutative_range = has_commutative_range(ins, tol);
  out.povm_marginal_spectral = povm_spectral(povm_marginal(ins), tol);
  out.decomposable = is_decomposable(ins, tol);
  out.defect = decomposability_defect(ins);
  out.pure = is_pure_instrument(ins, tol);

  BiDilation dil = minimal_bidilation(ins, tol);
  out.dims = dilation_dims(dil, tol);
  out.commutant_dim = dil.commutant_dim();
  out.dilation_report = verify_bidilation(ins, dil, tol);
  out.certificates.emplace_back("dilation", make_dilation_certificate(dil));

  out.spectral = out.unital && is_spectral(ins, tol);

  if (out.unital) {
    out.has_extremality = true;
    out.extreme = is_extreme(ins, tol);
    if (out.extreme.extreme)
      out.certificates.emplace_back("extreme", make_extreme_certificate(ins, out.extreme, tol));
    else
      out.certificates.emplace_back("non_extreme", make_nonextreme_certificate(out.extreme));

    out.cstar = is_cstar_extreme_instrument(ins, tol);
    CstarResult nest_path = cstar_nest_path(ins, tol);
    out.cstar_nest_agrees = nest_path.cstar_extreme == out.cstar.cstar_extreme;
    if (out.cstar.cstar_extreme)
      out.certificates.emplace_back("cstar_extreme", make_cstar_certificate(out.cstar));
    else if (out.cstar.witness)
      out.certificates.emplace_back("not_cstar_extreme",
                                    make_not_cstar_certificate(*out.cstar.witness));
    out.cp_marginal_cstar = cp_marginal_cstar_extreme(ins, tol);
    out.dominated_pairs_ok =
        dominated_pair_check(ins, options.seed, options.dominated_pair_trials, tol);
  }

  if (!out.decomposable)
    out.certificates.emplace_back("decomposable_refutation", make_decomposable_refutation(ins));
  return out;
}

namespace {

const char* bool_str(bool b) { return b ? "true" : "false"; }

std::string atoms_str(const std::vector<std::vector<Index>>& atom_list) {
  std::string out = "[";
  for (size_t a = 0; a < atom_list.size(); ++a) {
    if (a) out += ",";
    out += "{";
    for (size_t i = 0; i < atom_list[a].size(); ++i) {
      if (i) out += ",";
      out += std::to_string(atom_list[a][i] + 1);
    }
    out += "}";
  }
  out += "]";
  return out;
}

}  // namespace

std::string analysis_report(const Analysis& a, const Instrument& ins, const std::string& name,
                            const AnalysisOptions& options, bool as_json) {
  std::ostringstream out;
  if (as_json) {
    out << "{\"report\":\"analyze\",\"version\":\"" << kLibraryVersion << "\"";
    out << ",\"tolerance\":" << format_double(options.tol.eps);
    out << ",\"seed\":" << options.seed;
    out << ",\"instrument\":\"" << name << "\"";
    out << ",\"cp_valid\":" << bool_str(a.validation.cp_pass);
    out << ",\"unital\":" << bool_str(a.unital);
    out << ",\"normalization_defect\":" << format_double(a.validation.normalization_defect);
    out << ",\"zero\":" << bool_str(a.zeros.instrument_zero);
    out << ",\"atoms\":\"" << atoms_str(a.atom_list) << "\"";
    out << ",\"commutative_range\":" << bool_str(a.commutative_range);
    out << ",\"povm_marginal_spectral\":" << bool_str(a.povm_marginal_spectral);
    out << ",\"spectral\":" << bool_str(a.spectral);
    out << ",\"decomposable\":" << bool_str(a.decomposable);
    out << ",\"pure\":" << bool_str(a.pure);
    out << ",\"dilation_dims\":[" << a.dims.bi << "," << a.dims.cp_sub << "," << a.dims.povm_sub
        << "]";
    out << ",\"commutant_dim\":" << a.commutant_dim;
    if (a.has_extremality) {
      out << ",\"extreme\":" << bool_str(a.extreme.extreme);
      out << ",\"compression_rank\":" << a.extreme.compression_rank;
      out << ",\"cstar_extreme\":" << bool_str(a.cstar.cstar_extreme);
      out << ",\"cstar_paths_agree\":" << bool_str(a.cstar_nest_agrees);
      out << ",\"cp_marginal_cstar_extreme\":" << bool_str(a.cp_marginal_cstar);
      out << ",\"dominated_pairs_ok\":" << bool_str(a.dominated_pairs_ok);
    }
    out << ",\"certificates\":[";
    for (size_t c = 0; c < a.certificates.size(); ++c) {
      if (c) out << ",";
      out << "\"" << a.certificates[c].first << "\"";
    }
    out << "]}\n";
    return out.str();
  }

  out << "qiw analyze report\n";
  out << "version: " << kLibraryVersion << "\n";
  out << "tolerance: " << format_double(options.tol.eps) << "\n";
  out << "seed: " << options.seed << "\n";
  out << "instrument: " << name << "\n";
  out << "algebra blocks: [";
  for (size_t s = 0; s < ins.spec.block_dims.size(); ++s) {
    if (s) out << ",";
    out << ins.spec.block_dims[s];
  }
  out << "]\n";
  out << "output dim: " << ins.out_dim << "\n";
  out << "outcomes: " << ins.n_outcomes() << "\n";
  out << "cp valid: " << bool_str(a.validation.cp_pass) << "\n";
  out << "unital: " << bool_str(a.unital) << "\n";
  out << "normalization defect: " << format_double(a.validation.normalization_defect) << "\n";
  out << "zero instrument: " << bool_str(a.zeros.instrument_zero) << "\n";
  out << "atoms: " << atoms_str(a.atom_list) << "\n";
  out << "commutative range: " << bool_str(a.commutative_range) << "\n";
  out << "povm marginal spectral: " << bool_str(a.povm_marginal_spectral) << "\n";
  out << "spectral: " << bool_str(a.spectral) << "\n";
  out << "decomposable: " << bool_str(a.decomposable) << "\n";
  if (!a.decomposable)
    out << "decomposability defect: " << format_double(a.defect.defect) << " (outcome "
        << (a.defect.outcome + 1) << ", basis element " << (a.defect.basis_index + 1) << ")\n";
  out << "pure: " << bool_str(a.pure) << "\n";
  out << "dilation dims (bi, cp-sub, povm-sub): (" << a.dims.bi << ", " << a.dims.cp_sub << ", "
      << a.dims.povm_sub << ")\n";
  out << "commutant dim: " << a.commutant_dim << "\n";
  out << "dilation reconstruction residual: "
      << format_double(a.dilation_report.reconstruction_residual) << "\n";
  if (a.has_extremality) {
    out << "extreme: " << bool_str(a.extreme.extreme) << " (commutant dim "
        << a.extreme.commutant_dim << ", rank " << a.extreme.compression_rank << ")\n";
    out << "cstar extreme: " << bool_str(a.cstar.cstar_extreme);
    if (!a.cstar.cstar_extreme) {
      out << " (" << a.cstar.reject_reason;
      if (a.cstar.witness)
        out << "; outcome " << (a.cstar.witness->outcome + 1) << " eigenvalue "
            << format_double(a.cstar.witness->eigenvalue);
      out << ")";
    }
    out << "\n";
    out << "cstar paths agree: " << bool_str(a.cstar_nest_agrees) << "\n";
    out << "cp marginal cstar extreme: " << bool_str(a.cp_marginal_cstar) << "\n";
    out << "dominated pairs ok: " << bool_str(a.dominated_pairs_ok) << "\n";
  } else {
    out << "extreme: skipped (instrument not unital)\n";
    out << "cstar extreme: skipped (instrument not unital)\n";
  }
  out << "certificates: ";
  for (size_t c = 0; c < a.certificates.size(); ++c) {
    if (c) out << ", ";
    out << a.certificates[c].first;
  }
  out << "\n";
  return out.str();
}

}  // namespace qiw
