#pragma once

#include <cstdint>
#include <random>

#include "qiw/linalg.hpp"

namespace qiw {

/// Deterministic random source. The gaussian is hand-rolled Box-Muller on
/// exact 53-bit uniforms, so streams do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull) {}

  uint64_t bits() { return gen_(); }

  double uniform() {  // [0,1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Complex cnormal() {
    const double re = normal();
    return Complex(re, normal());
  }

  Index pick(Index lo, Index hi) {  // inclusive range
    return lo + static_cast<Index>(gen_() % static_cast<uint64_t>(hi - lo + 1));
  }

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = cnormal();
    return m;
  }

  Matrix hermitian(Index dim) {
    Matrix g = gaussian(dim, dim);
    return 0.5 * (g + g.adjoint());
  }

  Matrix psd(Index dim, Index rank) {
    Matrix g = gaussian(dim, rank);
    return g * g.adjoint();
  }

  Matrix unitary(Index dim) {
    Matrix g = gaussian(dim, dim);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < dim; ++i) {
      Complex d = r(i, i);
      q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
    }
    return q;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qiw
