// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria. All thresholds are fixed here, in code.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "corpus.hpp"
#include "oracles.hpp"
#include "qiw/analysis.hpp"
#include "qiw/catalog.hpp"
#include "qiw/io.hpp"
#include "qiw/rng.hpp"

using namespace qiw;
using qiw::testing::CorpusInstance;

namespace {

const Tolerance tol{};  // eps = 1e-8 everywhere

struct Harness {
  int failures = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& body) {
    auto begin = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const Error& e) {
      detail = std::string("exception [") + error_code_name(e.code()) + "]: " + e.what();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << number << ". " << label << " ("
              << std::fixed << std::setprecision(1) << ms << " ms)";
    if (!ok && !detail.empty()) std::cout << " -- " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
  }
};

template <typename F>
double timed_s(F&& f) {
  auto begin = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
}

// Everything the corpus-wide criteria need, computed once per instance.
struct Record {
  const CorpusInstance* instance = nullptr;
  BiDilation dil;
  DilationReport dil_report;
  DilationDims dims;
  bool povm_spectral = false;
  bool commutative = false;
  bool spectral = false;
  bool decomposable = false;
  // Unital-only results:
  bool has_extremality = false;
  ExtremeResult extreme;
  bool cstar = false;
  bool cstar_nest = false;
  bool cp_marginal_cstar = false;
  std::optional<NonProjectionWitness> cstar_witness;
  CstarResult cstar_result;
  int theory_violations = 0;
};

}  // namespace

int main() {
  Harness h;
  std::vector<CorpusInstance> corpus = qiw::testing::build_corpus();

  // Criterion 1: the Lüders family at t = 1/4 and t = 1/2.
  h.criterion(1, "luders family: extreme/cstar verdicts with witnesses", [&](std::string& why) {
    Instrument quarter = luders_example(0.25);
    Instrument half = luders_example(0.5);
    ExtremeResult eq, eh;
    CstarResult cq;
    double t1 = timed_s([&] { eq = is_extreme(quarter, tol); });
    double t2 = timed_s([&] { cq = is_cstar_extreme_instrument(quarter, tol); });
    double t3 = timed_s([&] { eh = is_extreme(half, tol); });
    if (!eq.extreme) { why = "t=1/4 not reported extreme"; return false; }
    if (cq.cstar_extreme) { why = "t=1/4 reported C*-extreme"; return false; }
    if (!cq.witness) { why = "t=1/4 missing non-projection witness"; return false; }
    if (std::abs(cq.witness->eigenvalue - 0.25) > 1e-6) {
      why = "witness eigenvalue " + format_double(cq.witness->eigenvalue);
      return false;
    }
    if (eh.extreme) { why = "t=1/2 reported extreme"; return false; }
    if (!eh.witness_pair) { why = "t=1/2 missing witness pair"; return false; }
    CheckReport check = check_certificate(make_nonextreme_certificate(eh), half, tol);
    if (!check.pass) { why = "witness pair failed check: " + check.failed_clause; return false; }
    if (t1 > 0.1 || t2 > 0.1 || t3 > 0.1) { why = "decision exceeded 0.1 s"; return false; }
    return true;
  });

  // Criterion 2: the diagonal example.
  h.criterion(2, "diagonal example: cstar certificate, non-extreme CP marginal", [&](std::string& why) {
    Instrument diag = diagonal_example();
    CstarResult cstar;
    bool marginal_cstar = true;
    ExtremeResult marginal_extreme;
    double t1 = timed_s([&] { cstar = is_cstar_extreme_instrument(diag, tol); });
    double t2 = timed_s([&] { marginal_cstar = cp_marginal_cstar_extreme(diag, tol); });
    double t3 = timed_s([&] { marginal_extreme = is_extreme(from_cpmap(cp_marginal(diag)), tol); });
    if (!cstar.cstar_extreme) { why = "not reported C*-extreme"; return false; }
    CheckReport check = check_certificate(make_cstar_certificate(cstar), diag, tol);
    if (!check.pass) { why = "certificate failed: " + check.failed_clause; return false; }
    if (marginal_cstar) { why = "CP marginal reported C*-extreme"; return false; }
    if (marginal_extreme.extreme) { why = "CP marginal reported extreme"; return false; }
    if (t1 > 0.1 || t2 > 0.1 || t3 > 0.1) { why = "decision exceeded 0.1 s"; return false; }
    return true;
  });

  // Criterion 3: the ω-POVM example.
  h.criterion(3, "omega POVM: extreme, Naimark instrument extreme and not decomposable",
              [&](std::string& why) {
    Instrument trivial = povm_as_instrument_trivial_algebra(omega_povm());
    Instrument naimark = omega_naimark_example();
    ExtremeResult povm_extreme, naimark_extreme;
    bool decomposable = true;
    double t1 = timed_s([&] { povm_extreme = is_extreme(trivial, tol); });
    double t2 = timed_s([&] { naimark_extreme = is_extreme(naimark, tol); });
    double t3 = timed_s([&] { decomposable = is_decomposable(naimark, tol); });
    if (!povm_extreme.extreme) { why = "POVM (as C-instrument) not extreme"; return false; }
    if (!naimark_extreme.extreme) { why = "Naimark instrument not extreme"; return false; }
    if (decomposable) { why = "Naimark instrument reported decomposable"; return false; }
    CheckReport check = check_certificate(make_decomposable_refutation(naimark), naimark, tol);
    if (!check.pass) { why = "refutation failed: " + check.failed_clause; return false; }
    if (t1 > 0.1 || t2 > 0.1 || t3 > 0.1) { why = "decision exceeded 0.1 s"; return false; }
    return true;
  });

  // Criterion 4: the pure 4/2 example.
  h.criterion(4, "pure 4/2 example: purity, dilation dims (4,4,2), cstar extreme",
              [&](std::string& why) {
    Instrument pure = pure_4_2_example();
    bool is_pure = false;
    DilationDims dims;
    CstarResult cstar;
    double t1 = timed_s([&] { is_pure = is_pure_instrument(pure, tol); });
    double t2 = timed_s([&] { dims = dilation_dims(minimal_bidilation(pure, tol), tol); });
    double t3 = timed_s([&] { cstar = is_cstar_extreme_instrument(pure, tol); });
    if (!is_pure) { why = "not reported pure"; return false; }
    if (dims.bi != 4 || dims.cp_sub != 4 || dims.povm_sub != 2) {
      std::ostringstream s;
      s << "dims (" << dims.bi << "," << dims.cp_sub << "," << dims.povm_sub << ")";
      why = s.str();
      return false;
    }
    if (!cstar.cstar_extreme) { why = "not reported C*-extreme"; return false; }
    if (t1 > 0.1 || t2 > 0.1 || t3 > 0.1) { why = "decision exceeded 0.1 s"; return false; }
    return true;
  });

  // Shared per-instance computations for criteria 5-10.
  std::vector<Record> records;
  records.reserve(corpus.size());
  Index random_count = 0;
  for (const CorpusInstance& instance : corpus) {
    Record rec;
    rec.instance = &instance;
    rec.dil = minimal_bidilation(instance.ins, tol);
    rec.dil_report = verify_bidilation(instance.ins, rec.dil, tol);
    rec.dims = dilation_dims(rec.dil, tol);
    rec.povm_spectral = povm_spectral(povm_marginal(instance.ins), tol);
    rec.commutative = has_commutative_range(instance.ins, tol);
    rec.decomposable = is_decomposable(instance.ins, tol);
    if (instance.unital) {
      rec.spectral = is_spectral(instance.ins, tol);
      rec.has_extremality = true;
      rec.extreme = is_extreme(instance.ins, tol);
      try {
        rec.cstar_result = is_cstar_extreme_instrument(instance.ins, tol);
        rec.cstar = rec.cstar_result.cstar_extreme;
        rec.cstar_witness = rec.cstar_result.witness;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TheoryViolation) throw;
        ++rec.theory_violations;
      }
      try {
        rec.cstar_nest = cstar_nest_path(instance.ins, tol).cstar_extreme;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TheoryViolation) throw;
        ++rec.theory_violations;
      }
      try {
        rec.cp_marginal_cstar = cp_marginal_cstar_extreme(instance.ins, tol);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TheoryViolation) throw;
        ++rec.theory_violations;
      }
    }
    if (instance.name.rfind("random-", 0) == 0) ++random_count;
    records.push_back(std::move(rec));
  }

  // Criterion 5: bi-dilation contract on the random corpus.
  h.criterion(5, "bi-dilation contract on the seeded corpus", [&](std::string& why) {
    if (random_count < 200) { why = "corpus has fewer than 200 random instruments"; return false; }
    for (const Record& rec : records) {
      const double scale = std::max(1.0, rec.instance->ins.choi_norm());
      if (rec.dil_report.reconstruction_residual > 1e-8 * scale ||
          rec.dil_report.commutation_residual > 1e-8 ||
          rec.dil_report.spectrality_defect > 1e-8 || !rec.dil_report.minimal) {
        why = rec.instance->name + ": dilation residuals";
        return false;
      }
      if (rec.instance->unital && rec.dil_report.isometry_defect > 1e-8) {
        why = rec.instance->name + ": V*V != I";
        return false;
      }
    }
    return true;
  });

  // Criterion 6: RN roundtrip on >= 200 seeded pairs.
  h.criterion(6, "rn roundtrip recovers random contractions", [&](std::string& why) {
    Index pairs = 0;
    uint64_t seed = 10000;
    for (const Record& rec : records) {
      if (!rec.instance->unital) continue;
      if (rec.dil.total_dim == 0) continue;
      HermitianCommutantBasis basis = hermitian_commutant_basis(rec.dil);
      if (basis.dimension() == 0) continue;
      Rng rng(seed++);
      std::vector<double> coords(static_cast<size_t>(basis.dimension()));
      for (double& c : coords) c = rng.normal();
      Matrix d0 = basis.assemble(coords);
      d0 = 0.5 * (d0 + d0.adjoint());
      const double norm = op_norm(d0);
      if (norm < 1e-12) continue;
      d0 = 0.5 * (Matrix::Identity(rec.dil.total_dim, rec.dil.total_dim) + d0 / (2.0 * norm));
      Instrument dominated = rn_apply(rec.dil, d0, tol);
      RNDerivative recovered = rn_derivative(dominated, rec.dil, tol);
      if (fro_norm(recovered.D - d0) > 1e-6) {
        why = rec.instance->name + ": derivative drift " + format_double(fro_norm(recovered.D - d0));
        return false;
      }
      ++pairs;
    }
    if (pairs < 200) {
      why = "only " + std::to_string(pairs) + " roundtrip pairs";
      return false;
    }
    return true;
  });

  // Criterion 7: implication suite.
  h.criterion(7, "implication suite over the corpus", [&](std::string& why) {
    for (const Record& rec : records) {
      if (!rec.has_extremality) continue;
      const std::string& name = rec.instance->name;
      if (rec.cstar && !rec.extreme.extreme) { why = name + ": cstar but not extreme"; return false; }
      if (rec.cstar && !rec.povm_spectral) { why = name + ": cstar but POVM marginal not spectral"; return false; }
      if (rec.cstar && rec.dims.bi != rec.dims.cp_sub) { why = name + ": cstar but bi != cp-sub"; return false; }
      if (rec.extreme.extreme && rec.commutative && !rec.povm_spectral) {
        why = name + ": extreme + commutative range but POVM marginal not spectral";
        return false;
      }
      if (rec.povm_spectral && rec.cp_marginal_cstar && !rec.cstar) {
        why = name + ": both marginals C*-extreme but instrument is not";
        return false;
      }
      if (rec.spectral && !(rec.extreme.extreme && rec.cstar && rec.decomposable)) {
        why = name + ": spectral without extreme/cstar/decomposable";
        return false;
      }
      // For C*-extreme instruments, subset totals that commute with the
      // relevant values must be projections (always checkable for n <= 8).
      if (rec.cstar && rec.instance->ins.n_outcomes() <= 8) {
        const Instrument& ins = rec.instance->ins;
        const auto units = matrix_unit_basis(ins.spec);
        AlgebraElement one = identity(ins.spec);
        for (uint32_t mask = 1; mask < (1u << ins.n_outcomes()); ++mask) {
          std::vector<Index> subset;
          for (Index i = 0; i < ins.n_outcomes(); ++i)
            if (mask & (1u << i)) subset.push_back(i);
          Matrix total = value(ins, subset, one);
          bool commutes = true;
          for (Index i : subset)
            for (const auto& unit : units) {
              Matrix v = apply(ins.map(i), unit);
              if (fro_norm(total * v - v * total) > 1e-7) commutes = false;
            }
          if (commutes && !is_projection(total, Tolerance{1e-7})) {
            why = name + ": commuting subset total is not a projection";
            return false;
          }
        }
      }
    }
    return true;
  });

  // Criterion 8: oracle equivalence.
  h.criterion(8, "oracle equivalence (commutant span, nonextreme search)", [&](std::string& why) {
    for (const Record& rec : records) {
      CommutantBasis structured = commutant_basis(rec.dil);
      auto brute = qiw::oracles::commutant_bruteforce(
          qiw::oracles::bidilation_generators(rec.dil), tol);
      if (static_cast<Index>(brute.size()) != structured.dimension() ||
          !qiw::oracles::same_span(structured.elements, brute, tol)) {
        why = rec.instance->name + ": commutant spans differ";
        return false;
      }
    }
    for (const Record& rec : records) {
      if (!rec.instance->small || !rec.has_extremality) continue;
      auto found = qiw::oracles::nonextreme_search(rec.instance->ins, 12345, 10000, tol);
      if (rec.extreme.extreme && found) {
        why = rec.instance->name + ": oracle refuted a positive extreme verdict";
        return false;
      }
      if (!rec.extreme.extreme && !found) {
        why = rec.instance->name + ": oracle missed a nonzero kernel";
        return false;
      }
    }
    return true;
  });

  // Criterion 9: the two C*-extremity paths agree; no theory violations.
  h.criterion(9, "cstar decision paths agree with zero theory violations", [&](std::string& why) {
    for (const Record& rec : records) {
      if (!rec.has_extremality) continue;
      if (rec.theory_violations > 0) {
        why = rec.instance->name + ": theory violation raised";
        return false;
      }
      if (rec.cstar != rec.cstar_nest) {
        why = rec.instance->name + ": outcome-block and nest paths disagree";
        return false;
      }
    }
    return true;
  });

  // Criterion 10: certificates pass the checker; tampered fixtures fail with
  // the designated clause; full suite under 60 s.
  h.criterion(10, "certificate closure, tampered fixtures, wall-clock", [&](std::string& why) {
    for (const Record& rec : records) {
      const Instrument& ins = rec.instance->ins;
      if (!check_certificate(make_dilation_certificate(rec.dil), ins, tol).pass) {
        why = rec.instance->name + ": dilation certificate rejected";
        return false;
      }
      if (rec.has_extremality) {
        Certificate cert = rec.extreme.extreme
                               ? make_extreme_certificate(ins, rec.extreme, tol)
                               : make_nonextreme_certificate(rec.extreme);
        CheckReport report = check_certificate(cert, ins, tol);
        if (!report.pass) {
          why = rec.instance->name + ": extremality certificate rejected (" +
                report.failed_clause + ")";
          return false;
        }
        if (rec.cstar) {
          CheckReport cs = check_certificate(make_cstar_certificate(rec.cstar_result), ins, tol);
          if (!cs.pass) {
            why = rec.instance->name + ": cstar certificate rejected (" + cs.failed_clause + ")";
            return false;
          }
        } else if (rec.cstar_witness) {
          CheckReport cs =
              check_certificate(make_not_cstar_certificate(*rec.cstar_witness), ins, tol);
          if (!cs.pass) {
            why = rec.instance->name + ": non-projection witness rejected (" + cs.failed_clause + ")";
            return false;
          }
        }
      }
      if (!rec.decomposable) {
        CheckReport report = check_certificate(make_decomposable_refutation(ins), ins, tol);
        if (!report.pass) {
          why = rec.instance->name + ": decomposability refutation rejected";
          return false;
        }
      }
    }

    // Tampered fixtures, one per kind, each failing its designated clause.
    auto expect_fail = [&](const Certificate& cert, const Instrument& ins,
                           const std::string& clause) {
      CheckReport report = check_certificate(cert, ins, tol);
      return !report.pass && report.failed_clause == clause;
    };
    Instrument diag = diagonal_example();
    BiDilation dil = minimal_bidilation(diag, tol);
    {
      Certificate cert = make_dilation_certificate(dil);
      std::get<DilationExport>(cert.payload).V *= 0.5;
      if (!expect_fail(cert, diag, "reconstruction")) { why = "tampered dilation"; return false; }
    }
    {
      Certificate cert = make_extreme_certificate(diag, is_extreme(diag, tol), tol);
      std::get<ExtremePayload>(cert.payload).commutant_dim += 1;
      if (!expect_fail(cert, diag, "commutant_dim")) { why = "tampered extreme"; return false; }
    }
    {
      ExtremeResult half = is_extreme(luders_example(0.5), tol);
      Certificate cert = make_nonextreme_certificate(half);
      std::get<NonExtremePayload>(cert.payload).minus =
          std::get<NonExtremePayload>(cert.payload).plus;
      if (!expect_fail(cert, luders_example(0.5), "midpoint")) {
        why = "tampered non_extreme";
        return false;
      }
    }
    {
      Certificate cert = make_cstar_certificate(is_cstar_extreme_instrument(diag, tol));
      std::get<CstarExtremePayload>(cert.payload).unitary *= 2.0;
      if (!expect_fail(cert, diag, "unitary")) { why = "tampered cstar"; return false; }
    }
    {
      CstarResult quarter = is_cstar_extreme_instrument(luders_example(0.25), tol);
      Certificate cert = make_not_cstar_certificate(*quarter.witness);
      std::get<NotCstarExtremePayload>(cert.payload).eigenvalue = 1.0 - 1e-12;
      if (!expect_fail(cert, luders_example(0.25), "eigenvalue_interior")) {
        why = "tampered not_cstar";
        return false;
      }
    }
    {
      Instrument base = luders_example(0.25);
      BiDilation base_dil = minimal_bidilation(base, tol);
      RNDerivative derivative = rn_derivative(base, base_dil, tol);
      Certificate cert = make_rn_certificate(base, base_dil, derivative);
      auto& payload = std::get<RnPayload>(cert.payload);
      for (double& c : payload.coords) c *= 3.0;
      payload.d *= 3.0;
      if (!expect_fail(cert, base, "contraction")) { why = "tampered rn"; return false; }
    }
    {
      Certificate cert;
      cert.kind = CertKind::DecomposableRefutation;
      cert.payload = DecomposableRefutationPayload{0, 0};
      if (!expect_fail(cert, diag, "violated")) { why = "tampered refutation"; return false; }
    }

    if (h.elapsed_s() > 60.0) {
      why = "suite exceeded 60 s";
      return false;
    }
    return true;
  });

  std::cout << "acceptance total: " << std::fixed << std::setprecision(1) << h.elapsed_s()
            << " s, " << (10 - h.failures) << "/10 criteria passed\n";
  return h.failures;
}
