#pragma once

#include "qiw/instrument.hpp"

namespace qiw {

/// Bundled workbench instances. "luders-t" is parametrized by t in (0,1);
/// the default is t = 1/4. The extreme/non-extreme boundary of the family
/// sits at t = 1/2.

Povm luders_povm(double t);
Instrument luders_example(double t);

/// Two-outcome instrument on M_2 sending a to a_11·E11 and a_22·E22.
Instrument diagonal_example();

/// Four rank-one effects on C^2 built from the primitive cube root of unity.
Povm omega_povm();
/// Its minimal-Naimark instrument over the four-point function algebra.
Instrument omega_naimark_example();

/// Pure instrument on a four-dimensional algebra compressed to C^2, with the
/// second outcome zero; its POVM sub-minimal dilation is strictly smaller
/// than the bi-dilation.
Instrument pure_4_2_example();

std::vector<std::string> example_names();
bool is_example_name(const std::string& name);
Instrument make_example(const std::string& name, double t);

}  // namespace qiw
