#pragma once

#include <string>

#include "qiw/certificates.hpp"

namespace qiw {

/// Instrument and certificate files are JSON. Complex scalars are [re, im]
/// pairs, matrices row-major lists of rows, outcome and factor indices
/// 1-based. Serialization is canonical: fixed field order and %.17g floats,
/// so equal objects produce byte-identical files.

Instrument parse_instrument(const std::string& text);
std::string serialize_instrument(const Instrument& ins);

Certificate parse_certificate(const std::string& text);
std::string serialize_certificate(const Certificate& cert);

std::string format_double(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace qiw
