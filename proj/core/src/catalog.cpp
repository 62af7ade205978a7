#include "qiw/catalog.hpp"

#include <cmath>

namespace qiw {

Povm luders_povm(double t) {
  if (!(t > 0.0 && t < 1.0))
    throw Error(ErrorCode::ShapeMismatch, "luders_povm: t must lie in (0,1)");
  Povm povm;
  povm.out_dim = 2;
  Matrix mu1 = Matrix::Zero(2, 2);
  mu1(0, 0) = t;
  mu1(1, 1) = 1.0 - t;
  Matrix mu2 = Matrix::Zero(2, 2);
  mu2(0, 0) = 1.0 - t;
  mu2(1, 1) = t;
  povm.effects = {mu1, mu2};
  return povm;
}

Instrument luders_example(double t) { return luders(luders_povm(t), Tolerance{}); }

Instrument diagonal_example() {
  AlgebraSpec spec{{2}};
  std::vector<CPMap> maps;
  for (Index i = 0; i < 2; ++i) {
    Matrix k = Matrix::Zero(2, 2);
    k(i, i) = Complex(1, 0);
    KrausSet kraus;
    kraus.spec = spec;
    kraus.out_dim = 2;
    kraus.ops = {{k}};
    maps.push_back(cpmap_from_kraus(kraus));
  }
  return Instrument(spec, 2, std::move(maps));
}

Povm omega_povm() {
  const Complex omega = std::polar(1.0, 2.0 * M_PI / 3.0);
  const double s2 = std::sqrt(2.0);
  Povm povm;
  povm.out_dim = 2;
  Matrix m1(2, 2), m2(2, 2), m3(2, 2), m4(2, 2);
  m1 << Complex(0.5, 0), Complex(0, 0), Complex(0, 0), Complex(0, 0);
  m2 << Complex(1, 0), Complex(s2, 0), Complex(s2, 0), Complex(2, 0);
  m3 << Complex(1, 0), s2 * omega * omega, s2 * omega, Complex(2, 0);
  m4 << Complex(1, 0), s2 * omega, s2 * omega * omega, Complex(2, 0);
  povm.effects = {m1, m2 / 6.0, m3 / 6.0, m4 / 6.0};
  return povm;
}

Instrument omega_naimark_example() {
  return instrument_from_povm_naimark(omega_povm(), Tolerance{});
}

Instrument pure_4_2_example() {
  AlgebraSpec spec{{4}};
  Matrix v = Matrix::Zero(4, 2);  // the first-two-coordinates isometry
  v(0, 0) = Complex(1, 0);
  v(1, 1) = Complex(1, 0);
  KrausSet kraus;
  kraus.spec = spec;
  kraus.out_dim = 2;
  kraus.ops = {{v}};
  std::vector<CPMap> maps{cpmap_from_kraus(kraus), CPMap::zero(spec, 2)};
  return Instrument(spec, 2, std::move(maps));
}

std::vector<std::string> example_names() {
  return {"luders-t", "diagonal", "omega-povm", "pure-4-2"};
}

bool is_example_name(const std::string& name) {
  for (const std::string& known : example_names())
    if (known == name) return true;
  return false;
}

Instrument make_example(const std::string& name, double t) {
  if (name == "luders-t") return luders_example(t);
  if (name == "diagonal") return diagonal_example();
  if (name == "omega-povm") return omega_naimark_example();
  if (name == "pure-4-2") return pure_4_2_example();
  throw Error(ErrorCode::ParseError, "unknown example '" + name + "'");
}

}  // namespace qiw
