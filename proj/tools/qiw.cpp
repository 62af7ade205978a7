// qiw: command-line workbench for quantum instruments on finite outcome sets.
//
// Exit codes: 0 success / verdict true; 1 negative verdict or failed check;
// 2 parse or shape error; 3 theory-violation (a structural self-check failed).

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qiw/analysis.hpp"
#include "qiw/catalog.hpp"
#include "qiw/io.hpp"

namespace {

using namespace qiw;

struct Options {
  double tol_eps = 1e-8;
  uint64_t seed = 0;
  bool json = false;
  std::string out;
  double t = 0.25;

  Tolerance tol() const { return Tolerance{tol_eps}; }
};

Instrument resolve_instrument(const std::string& arg, const Options& options) {
  if (is_example_name(arg)) return make_example(arg, options.t);
  return parse_instrument(read_file(arg));
}

void write_or_print(const Options& options, const std::string& content) {
  if (options.out.empty())
    std::cout << content;
  else
    write_file(options.out, content);
}

void print_matrix(const Matrix& m, const std::string& indent) {
  for (Index r = 0; r < m.rows(); ++r) {
    std::cout << indent << "[";
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) std::cout << ", ";
      std::cout << format_double(m(r, c).real()) << (m(r, c).imag() < 0 ? "-" : "+")
                << format_double(std::abs(m(r, c).imag())) << "i";
    }
    std::cout << "]\n";
  }
}

int verdict_output(const Options& options, const std::string& command, const std::string& name,
                   bool verdict, const std::string& detail) {
  if (options.json) {
    std::cout << "{\"command\":\"" << command << "\",\"instrument\":\"" << name
              << "\",\"verdict\":" << (verdict ? "true" : "false");
    if (!detail.empty()) std::cout << ",\"detail\":\"" << detail << "\"";
    std::cout << ",\"tolerance\":" << format_double(options.tol_eps) << "}\n";
  } else {
    std::cout << command << ": " << (verdict ? "true" : "false");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
  }
  return verdict ? 0 : 1;
}

int cmd_validate(const std::string& arg, const Options& options, bool require_unital) {
  Instrument ins = resolve_instrument(arg, options);
  ValidationReport report = validate(ins, options.tol(), require_unital);
  if (options.json) {
    std::cout << "{\"command\":\"validate\",\"cp_valid\":" << (report.cp_pass ? "true" : "false")
              << ",\"unital\":" << (report.unital_pass ? "true" : "false")
              << ",\"normalization_defect\":" << format_double(report.normalization_defect)
              << ",\"pass\":" << (report.pass ? "true" : "false") << "}\n";
  } else {
    for (const OutcomeValidation& ov : report.outcomes)
      std::cout << "outcome " << (ov.outcome + 1) << ": cp " << (ov.cp_ok ? "ok" : "VIOLATED")
                << " (min eigenvalue " << format_double(ov.min_eigenvalue) << ", hermiticity defect "
                << format_double(ov.herm_defect) << ")\n";
    std::cout << "normalization defect: " << format_double(report.normalization_defect) << "\n";
    std::cout << "validate: " << (report.pass ? "pass" : "fail") << "\n";
  }
  return report.pass ? 0 : 1;
}

int cmd_marginals(const std::string& arg, const Options& options) {
  Instrument ins = resolve_instrument(arg, options);
  Povm mu = povm_marginal(ins);
  CPMap phi = cp_marginal(ins);
  for (Index i = 0; i < mu.n_outcomes(); ++i) {
    std::cout << "povm effect " << (i + 1) << ":\n";
    print_matrix(mu.effects[static_cast<size_t>(i)], "  ");
  }
  std::cout << "povm normalized: " << (mu.is_normalized(options.tol()) ? "true" : "false") << "\n";
  std::cout << "povm spectral: " << (povm_spectral(mu, options.tol()) ? "true" : "false") << "\n";
  std::cout << "cp marginal unital: " << (is_unital(phi, options.tol()) ? "true" : "false") << "\n";
  std::cout << "cp marginal homomorphism: " << (is_homomorphism(phi, options.tol()) ? "true" : "false")
            << "\n";
  return 0;
}

int cmd_dilate(const std::string& arg, const Options& options) {
  Instrument ins = resolve_instrument(arg, options);
  BiDilation dil = minimal_bidilation(ins, options.tol());
  DilationReport report = verify_bidilation(ins, dil, options.tol());
  DilationDims dims = dilation_dims(dil, options.tol());
  std::cout << "dilation dims (bi, cp-sub, povm-sub): (" << dims.bi << ", " << dims.cp_sub << ", "
            << dims.povm_sub << ")\n";
  std::cout << "commutant dim: " << dil.commutant_dim() << "\n";
  std::cout << "reconstruction residual: " << format_double(report.reconstruction_residual) << "\n";
  std::cout << "minimality: " << (report.minimal ? "ok" : "VIOLATED") << "\n";
  std::cout << "isometry defect: " << format_double(report.isometry_defect) << "\n";
  if (!options.out.empty())
    write_file(options.out, serialize_certificate(make_dilation_certificate(dil)));
  return 0;
}

int cmd_extreme(const std::string& arg, const std::string& name, const Options& options) {
  Instrument ins = resolve_instrument(arg, options);
  ExtremeResult result = is_extreme(ins, options.tol());
  if (!options.out.empty()) {
    Certificate cert = result.extreme ? make_extreme_certificate(ins, result, options.tol())
                                      : make_nonextreme_certificate(result);
    write_file(options.out, serialize_certificate(cert));
  }
  std::ostringstream detail;
  detail << "commutant dim " << result.commutant_dim << ", rank " << result.compression_rank;
  return verdict_output(options, "extreme", name, result.extreme, detail.str());
}

int cmd_cstar(const std::string& arg, const std::string& name, const Options& options) {
  Instrument ins = resolve_instrument(arg, options);
  CstarResult result = is_cstar_extreme_instrument(ins, options.tol());
  if (!options.out.empty()) {
    if (result.cstar_extreme)
      write_file(options.out, serialize_certificate(make_cstar_certificate(result)));
    else if (result.witness)
      write_file(options.out, serialize_certificate(make_not_cstar_certificate(*result.witness)));
  }
  std::string detail = result.reject_reason;
  if (result.witness) {
    std::ostringstream extra;
    extra << result.reject_reason << "; outcome " << (result.witness->outcome + 1)
          << " eigenvalue " << format_double(result.witness->eigenvalue);
    detail = extra.str();
  }
  return verdict_output(options, "cstar-extreme", name, result.cstar_extreme, detail);
}

int cmd_rn(const std::string& arg_j, const std::string& arg_i, const Options& options) {
  Instrument j = resolve_instrument(arg_j, options);
  Instrument i = resolve_instrument(arg_i, options);
  BiDilation dil = minimal_bidilation(i, options.tol());
  RNDerivative derivative;
  try {
    derivative = rn_derivative(j, dil, options.tol());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotDominated) {
      std::cout << "dominated: false (" << e.what() << ")\n";
      return 1;
    }
    throw;
  }
  std::cout << "dominated: true\n";
  std::cout << "rn residual: " << format_double(derivative.residual) << "\n";
  std::cout << "coords:";
  for (double c : derivative.coords) std::cout << " " << format_double(c);
  std::cout << "\n";
  if (!options.out.empty())
    write_file(options.out, serialize_certificate(make_rn_certificate(j, dil, derivative)));
  return 0;
}

int cmd_disjoint(const std::string& arg_a, const std::string& arg_b, const Options& options) {
  Instrument a = resolve_instrument(arg_a, options);
  Instrument b = resolve_instrument(arg_b, options);
  BiDilation da = minimal_bidilation(a, options.tol());
  BiDilation db = minimal_bidilation(b, options.tol());
  bool disjoint = spectral_disjointness(da, db, options.tol());
  return verdict_output(options, "disjoint", arg_a + " vs " + arg_b, disjoint, "");
}

int cmd_analyze(const std::string& arg, const std::string& name, const Options& options) {
  Instrument ins = resolve_instrument(arg, options);
  AnalysisOptions aopt;
  aopt.tol = options.tol();
  aopt.seed = options.seed;
  Analysis analysis = analyze(ins, aopt);
  std::string report = analysis_report(analysis, ins, name, aopt, options.json);
  if (options.out.empty()) {
    std::cout << report;
  } else {
    std::filesystem::create_directories(options.out);
    write_file(options.out + "/report.txt", report);
    for (const auto& [kind, cert] : analysis.certificates)
      write_file(options.out + "/" + kind + ".json", serialize_certificate(cert));
    std::cout << report;
  }
  return 0;
}

int cmd_check_cert(const std::string& cert_path, const std::string& ins_arg,
                   const Options& options) {
  Certificate cert = parse_certificate(read_file(cert_path));
  Instrument ins = resolve_instrument(ins_arg, options);
  CheckReport report = check_certificate(cert, ins, options.tol());
  if (report.pass) {
    std::cout << "check: pass (" << cert_kind_name(cert.kind) << ")\n";
    return 0;
  }
  std::cout << "check: fail (" << report.failed_clause << ")\n";
  return 1;
}

int cmd_example(const std::string& name, const Options& options) {
  Instrument ins = make_example(name, options.t);
  write_or_print(options, serialize_instrument(ins));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qiw: verification workbench for quantum instruments"};
  app.require_subcommand(1);
  app.fallthrough();

  Options options;
  app.add_option("--tol", options.tol_eps, "tolerance eps (default 1e-8)");
  app.add_option("--seed", options.seed, "seed for randomized checks (default 0)");
  app.add_flag("--json", options.json, "machine-readable output");
  app.add_option("--out", options.out, "output path (file, or directory for analyze)");
  app.add_option("--t", options.t, "parameter for the luders-t family (default 0.25)");

  std::string arg1, arg2;
  bool require_unital = false;

  CLI::App* validate_cmd = app.add_subcommand("validate", "check CP and normalization");
  validate_cmd->add_option("instrument", arg1)->required();
  validate_cmd->add_flag("--unital", require_unital, "fail when not normalized");

  CLI::App* marginals_cmd = app.add_subcommand("marginals", "POVM and CP marginals");
  marginals_cmd->add_option("instrument", arg1)->required();

  CLI::App* dilate_cmd = app.add_subcommand("dilate", "minimal bi-dilation and its dimensions");
  dilate_cmd->add_option("instrument", arg1)->required();

  CLI::App* extreme_cmd = app.add_subcommand("extreme", "extreme-point test");
  extreme_cmd->add_option("instrument", arg1)->required();

  CLI::App* cstar_cmd = app.add_subcommand("cstar-extreme", "C*-extreme-point test");
  cstar_cmd->add_option("instrument", arg1)->required();

  CLI::App* pure_cmd = app.add_subcommand("pure", "pure-instrument test");
  pure_cmd->add_option("instrument", arg1)->required();

  CLI::App* spectral_cmd = app.add_subcommand("spectral", "spectral-instrument test");
  spectral_cmd->add_option("instrument", arg1)->required();

  CLI::App* decomposable_cmd = app.add_subcommand("decomposable", "product-of-marginals test");
  decomposable_cmd->add_option("instrument", arg1)->required();

  CLI::App* rn_cmd = app.add_subcommand("rn", "Radon-Nikodym derivative of J w.r.t. I");
  rn_cmd->add_option("dominated", arg1)->required();
  rn_cmd->add_option("dominating", arg2)->required();

  CLI::App* disjoint_cmd = app.add_subcommand("disjoint", "disjointness of two instruments");
  disjoint_cmd->add_option("first", arg1)->required();
  disjoint_cmd->add_option("second", arg2)->required();

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "full battery with certificates");
  analyze_cmd->add_option("instrument", arg1)->required();

  CLI::App* check_cmd = app.add_subcommand("check-cert", "re-verify a certificate");
  check_cmd->add_option("certificate", arg1)->required();
  check_cmd->add_option("instrument", arg2)->required();

  CLI::App* example_cmd = app.add_subcommand("example", "emit a bundled instrument");
  example_cmd->add_option("name", arg1)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(arg1, options, require_unital);
    if (marginals_cmd->parsed()) return cmd_marginals(arg1, options);
    if (dilate_cmd->parsed()) return cmd_dilate(arg1, options);
    if (extreme_cmd->parsed()) return cmd_extreme(arg1, arg1, options);
    if (cstar_cmd->parsed()) return cmd_cstar(arg1, arg1, options);
    if (pure_cmd->parsed()) {
      Instrument ins = resolve_instrument(arg1, options);
      return verdict_output(options, "pure", arg1, is_pure_instrument(ins, options.tol()), "");
    }
    if (spectral_cmd->parsed()) {
      Instrument ins = resolve_instrument(arg1, options);
      return verdict_output(options, "spectral", arg1, is_spectral(ins, options.tol()), "");
    }
    if (decomposable_cmd->parsed()) {
      Instrument ins = resolve_instrument(arg1, options);
      bool verdict = is_decomposable(ins, options.tol());
      if (!verdict && !options.out.empty())
        write_file(options.out, serialize_certificate(make_decomposable_refutation(ins)));
      DecomposabilityDefect defect = decomposability_defect(ins);
      std::string detail =
          verdict ? "" : "defect " + format_double(defect.defect) + " at outcome " +
                             std::to_string(defect.outcome + 1);
      return verdict_output(options, "decomposable", arg1, verdict, detail);
    }
    if (rn_cmd->parsed()) return cmd_rn(arg1, arg2, options);
    if (disjoint_cmd->parsed()) return cmd_disjoint(arg1, arg2, options);
    if (analyze_cmd->parsed()) return cmd_analyze(arg1, arg1, options);
    if (check_cmd->parsed()) return cmd_check_cert(arg1, arg2, options);
    if (example_cmd->parsed()) return cmd_example(arg1, options);
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::TheoryViolation ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
