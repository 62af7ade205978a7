#include "qiw/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qiw {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, "parse error at " + path + ": " + what);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

Index index_at(const json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<Index>();
}

Complex complex_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) parse_fail(path, "complex scalar must be [re, im]");
  return Complex(number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]"));
}

Matrix matrix_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "matrix must be a non-empty list of rows");
  const Index rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) parse_fail(path, "matrix row must be a non-empty list");
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      parse_fail(row_path, "ragged matrix row");
    for (Index c = 0; c < cols; ++c)
      m(r, c) = complex_at(row[static_cast<size_t>(c)], row_path + "[" + std::to_string(c) + "]");
  }
  if (!is_finite(m)) parse_fail(path, "non-finite matrix entry");
  return m;
}

Vector vector_at(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "vector must be a list");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i)
    v(i) = complex_at(j[static_cast<size_t>(i)], path + "[" + std::to_string(i) + "]");
  return v;
}

const json& field(const json& j, const char* name, const std::string& path) {
  if (!j.is_object() || !j.contains(name)) parse_fail(path, std::string("missing field '") + name + "'");
  return j.at(name);
}

AlgebraSpec algebra_at(const json& j, const std::string& path) {
  const json& blocks = field(j, "blocks", path);
  if (!blocks.is_array() || blocks.empty()) parse_fail(path + ".blocks", "expected factor dimensions");
  AlgebraSpec spec;
  for (size_t s = 0; s < blocks.size(); ++s)
    spec.block_dims.push_back(index_at(blocks[s], path + ".blocks[" + std::to_string(s) + "]"));
  try {
    spec.check_valid();
  } catch (const Error& e) {
    parse_fail(path, e.what());
  }
  return spec;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
}

// --- canonical emitter -------------------------------------------------

void emit_complex(std::string& out, Complex z) {
  out += '[';
  out += format_double(z.real());
  out += ',';
  out += format_double(z.imag());
  out += ']';
}

void emit_matrix(std::string& out, const Matrix& m) {
  out += '[';
  for (Index r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    out += '[';
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      emit_complex(out, m(r, c));
    }
    out += ']';
  }
  out += ']';
}

void emit_vector(std::string& out, const Vector& v) {
  out += '[';
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    emit_complex(out, v(i));
  }
  out += ']';
}

void emit_algebra(std::string& out, const AlgebraSpec& spec) {
  out += "{\"blocks\":[";
  for (size_t s = 0; s < spec.block_dims.size(); ++s) {
    if (s) out += ',';
    out += std::to_string(spec.block_dims[s]);
  }
  out += "]}";
}

void emit_instrument_body(std::string& out, const Instrument& ins) {
  out += "{\"version\":1,\"algebra\":";
  emit_algebra(out, ins.spec);
  out += ",\"output_dim\":" + std::to_string(ins.out_dim);
  out += ",\"outcomes\":" + std::to_string(ins.n_outcomes());
  out += ",\"maps\":[";
  bool first = true;
  for (Index i = 0; i < ins.n_outcomes(); ++i) {
    const CPMap& phi = ins.map(i);
    bool zero = true;
    for (const Matrix& c : phi.choi)
      if (fro_norm(c) != 0.0) zero = false;
    if (zero) continue;  // omitted outcomes are zero maps
    if (!first) out += ',';
    first = false;
    out += "{\"outcome\":" + std::to_string(i + 1) + ",\"form\":\"choi\",\"factors\":[";
    for (size_t s = 0; s < phi.choi.size(); ++s) {
      if (s) out += ',';
      emit_matrix(out, phi.choi[s]);
    }
    out += "]}";
  }
  out += "]}";
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // canonicalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Instrument parse_instrument(const std::string& text) {
  json j = parse_json(text);
  if (!j.is_object()) parse_fail("$", "instrument file must be an object");
  if (index_at(field(j, "version", "$"), "$.version") != 1)
    parse_fail("$.version", "unsupported version");
  AlgebraSpec spec = algebra_at(field(j, "algebra", "$"), "$.algebra");
  const Index k = index_at(field(j, "output_dim", "$"), "$.output_dim");
  const Index n = index_at(field(j, "outcomes", "$"), "$.outcomes");
  if (k < 1) parse_fail("$.output_dim", "output dimension must be >= 1");
  if (n < 1) parse_fail("$.outcomes", "outcome count must be >= 1");

  std::vector<CPMap> maps;
  for (Index i = 0; i < n; ++i) maps.push_back(CPMap::zero(spec, k));

  const json& entries = field(j, "maps", "$");
  if (!entries.is_array()) parse_fail("$.maps", "expected a list of outcome maps");
  for (size_t e = 0; e < entries.size(); ++e) {
    const std::string path = "$.maps[" + std::to_string(e) + "]";
    const json& entry = entries[e];
    const Index outcome = index_at(field(entry, "outcome", path), path + ".outcome");
    if (outcome < 1 || outcome > n) parse_fail(path + ".outcome", "outcome index out of range");
    const json& form = field(entry, "form", path);
    if (!form.is_string()) parse_fail(path + ".form", "expected \"choi\" or \"kraus\"");
    const std::string form_name = form.get<std::string>();
    const json& factors = field(entry, "factors", path);
    if (!factors.is_array() || static_cast<Index>(factors.size()) != spec.num_factors())
      parse_fail(path + ".factors", "expected one entry per algebra factor");

    if (form_name == "choi") {
      std::vector<Matrix> blocks;
      for (Index s = 0; s < spec.num_factors(); ++s) {
        const std::string fp = path + ".factors[" + std::to_string(s) + "]";
        Matrix c = matrix_at(factors[static_cast<size_t>(s)], fp);
        const Index expect = spec.block_dims[static_cast<size_t>(s)] * k;
        if (c.rows() != expect || c.cols() != expect)
          parse_fail(fp, "Choi block must be (d_s*k) x (d_s*k)");
        blocks.push_back(std::move(c));
      }
      maps[static_cast<size_t>(outcome - 1)] = CPMap(spec, k, std::move(blocks));
    } else if (form_name == "kraus") {
      KrausSet kraus;
      kraus.spec = spec;
      kraus.out_dim = k;
      for (Index s = 0; s < spec.num_factors(); ++s) {
        const std::string fp = path + ".factors[" + std::to_string(s) + "]";
        const json& list = factors[static_cast<size_t>(s)];
        if (!list.is_array()) parse_fail(fp, "expected a list of Kraus operators");
        std::vector<Matrix> ops;
        for (size_t o = 0; o < list.size(); ++o) {
          Matrix op = matrix_at(list[o], fp + "[" + std::to_string(o) + "]");
          if (op.rows() != spec.block_dims[static_cast<size_t>(s)] || op.cols() != k)
            parse_fail(fp + "[" + std::to_string(o) + "]", "Kraus operator must be d_s x k");
          ops.push_back(std::move(op));
        }
        kraus.ops.push_back(std::move(ops));
      }
      maps[static_cast<size_t>(outcome - 1)] = cpmap_from_kraus(kraus);
    } else {
      parse_fail(path + ".form", "unknown form '" + form_name + "'");
    }
  }
  return Instrument(spec, k, std::move(maps));
}

std::string serialize_instrument(const Instrument& ins) {
  std::string out;
  emit_instrument_body(out, ins);
  out += '\n';
  return out;
}

namespace {

void emit_dilation_body(std::string& out, const DilationExport& dil) {
  out += "{\"algebra\":";
  emit_algebra(out, dil.spec);
  out += ",\"output_dim\":" + std::to_string(dil.out_dim);
  out += ",\"outcomes\":" + std::to_string(dil.n_outcomes);
  out += ",\"blocks\":[";
  for (size_t b = 0; b < dil.blocks.size(); ++b) {
    if (b) out += ',';
    out += "{\"outcome\":" + std::to_string(dil.blocks[b].outcome + 1);
    out += ",\"factor\":" + std::to_string(dil.blocks[b].factor + 1);
    out += ",\"d\":" + std::to_string(dil.blocks[b].d);
    out += ",\"r\":" + std::to_string(dil.blocks[b].r) + "}";
  }
  out += "],\"v\":";
  emit_matrix(out, dil.V);
  out += "}";
}

DilationExport dilation_at(const json& j, const std::string& path) {
  DilationExport dil;
  dil.spec = algebra_at(field(j, "algebra", path), path + ".algebra");
  dil.out_dim = index_at(field(j, "output_dim", path), path + ".output_dim");
  dil.n_outcomes = index_at(field(j, "outcomes", path), path + ".outcomes");
  const json& blocks = field(j, "blocks", path);
  if (!blocks.is_array()) parse_fail(path + ".blocks", "expected a block table");
  Index offset = 0;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const std::string bp = path + ".blocks[" + std::to_string(b) + "]";
    DilationBlock block;
    block.outcome = index_at(field(blocks[b], "outcome", bp), bp + ".outcome") - 1;
    block.factor = index_at(field(blocks[b], "factor", bp), bp + ".factor") - 1;
    block.d = index_at(field(blocks[b], "d", bp), bp + ".d");
    block.r = index_at(field(blocks[b], "r", bp), bp + ".r");
    block.offset = offset;
    if (block.outcome < 0 || block.outcome >= dil.n_outcomes)
      parse_fail(bp + ".outcome", "outcome index out of range");
    if (block.factor < 0 || block.factor >= dil.spec.num_factors())
      parse_fail(bp + ".factor", "factor index out of range");
    if (block.d != dil.spec.block_dims[static_cast<size_t>(block.factor)])
      parse_fail(bp + ".d", "irrep dimension does not match the algebra");
    if (block.r < 1) parse_fail(bp + ".r", "block multiplicity must be >= 1");
    offset += block.d * block.r;
    dil.blocks.push_back(block);
  }
  dil.total_dim = offset;
  dil.V = matrix_at(field(j, "v", path), path + ".v");
  if (dil.V.rows() != dil.total_dim || dil.V.cols() != dil.out_dim)
    parse_fail(path + ".v", "V must be total_dim x output_dim");
  return dil;
}

}  // namespace

std::string serialize_certificate(const Certificate& cert) {
  std::string out = "{\"version\":1,\"kind\":\"";
  out += cert_kind_name(cert.kind);
  out += "\",";
  switch (cert.kind) {
    case CertKind::Dilation: {
      const auto& payload = std::get<DilationExport>(cert.payload);
      out += "\"dilation\":";
      emit_dilation_body(out, payload);
      break;
    }
    case CertKind::Extreme: {
      const auto& payload = std::get<ExtremePayload>(cert.payload);
      out += "\"ranks\":[";
      for (size_t t = 0; t < payload.ranks.size(); ++t) {
        if (t) out += ',';
        out += "{\"outcome\":" + std::to_string(payload.ranks[t].outcome + 1);
        out += ",\"factor\":" + std::to_string(payload.ranks[t].factor + 1);
        out += ",\"r\":" + std::to_string(payload.ranks[t].r) + "}";
      }
      out += "],\"commutant_dim\":" + std::to_string(payload.commutant_dim);
      out += ",\"compression_rank\":" + std::to_string(payload.compression_rank);
      break;
    }
    case CertKind::NonExtreme: {
      const auto& payload = std::get<NonExtremePayload>(cert.payload);
      out += "\"plus\":";
      emit_instrument_body(out, payload.plus);
      out += ",\"minus\":";
      emit_instrument_body(out, payload.minus);
      break;
    }
    case CertKind::CstarExtreme: {
      const auto& payload = std::get<CstarExtremePayload>(cert.payload);
      out += "\"unitary\":";
      emit_matrix(out, payload.unitary);
      out += ",\"blocks\":[";
      for (size_t b = 0; b < payload.blocks.size(); ++b) {
        if (b) out += ',';
        out += "{\"outcome\":" + std::to_string(payload.blocks[b].outcome + 1);
        out += ",\"factor\":" + std::to_string(payload.blocks[b].factor + 1);
        out += ",\"compression\":";
        emit_matrix(out, payload.blocks[b].compression);
        out += "}";
      }
      out += "]";
      break;
    }
    case CertKind::NotCstarExtreme: {
      const auto& payload = std::get<NotCstarExtremePayload>(cert.payload);
      out += "\"outcome\":" + std::to_string(payload.outcome + 1);
      out += ",\"eigenvalue\":" + format_double(payload.eigenvalue);
      out += ",\"eigenvector\":";
      emit_vector(out, payload.eigenvector);
      break;
    }
    case CertKind::Rn: {
      const auto& payload = std::get<RnPayload>(cert.payload);
      out += "\"dominated\":";
      emit_instrument_body(out, payload.dominated);
      out += ",\"dilation\":";
      emit_dilation_body(out, payload.dilation);
      out += ",\"coords\":[";
      for (size_t t = 0; t < payload.coords.size(); ++t) {
        if (t) out += ',';
        out += format_double(payload.coords[t]);
      }
      out += "],\"d\":";
      emit_matrix(out, payload.d);
      break;
    }
    case CertKind::DecomposableRefutation: {
      const auto& payload = std::get<DecomposableRefutationPayload>(cert.payload);
      out += "\"outcome\":" + std::to_string(payload.outcome + 1);
      out += ",\"basis_index\":" + std::to_string(payload.basis_index + 1);
      break;
    }
  }
  out += "}\n";
  return out;
}

Certificate parse_certificate(const std::string& text) {
  json j = parse_json(text);
  if (!j.is_object()) parse_fail("$", "certificate file must be an object");
  if (index_at(field(j, "version", "$"), "$.version") != 1)
    parse_fail("$.version", "unsupported version");
  const json& kind_field = field(j, "kind", "$");
  if (!kind_field.is_string()) parse_fail("$.kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();
  Certificate cert;
  if (kind == "dilation") {
    cert.kind = CertKind::Dilation;
    cert.payload = dilation_at(field(j, "dilation", "$"), "$.dilation");
  } else if (kind == "extreme") {
    cert.kind = CertKind::Extreme;
    ExtremePayload payload;
    const json& ranks = field(j, "ranks", "$");
    if (!ranks.is_array()) parse_fail("$.ranks", "expected a rank table");
    for (size_t t = 0; t < ranks.size(); ++t) {
      const std::string rp = "$.ranks[" + std::to_string(t) + "]";
      ExtremePayload::RankEntry entry;
      entry.outcome = index_at(field(ranks[t], "outcome", rp), rp + ".outcome") - 1;
      entry.factor = index_at(field(ranks[t], "factor", rp), rp + ".factor") - 1;
      entry.r = index_at(field(ranks[t], "r", rp), rp + ".r");
      payload.ranks.push_back(entry);
    }
    payload.commutant_dim = index_at(field(j, "commutant_dim", "$"), "$.commutant_dim");
    payload.compression_rank = index_at(field(j, "compression_rank", "$"), "$.compression_rank");
    cert.payload = std::move(payload);
  } else if (kind == "non_extreme") {
    cert.kind = CertKind::NonExtreme;
    NonExtremePayload payload;
    payload.plus = parse_instrument(field(j, "plus", "$").dump());
    payload.minus = parse_instrument(field(j, "minus", "$").dump());
    cert.payload = std::move(payload);
  } else if (kind == "cstar_extreme") {
    cert.kind = CertKind::CstarExtreme;
    CstarExtremePayload payload;
    payload.unitary = matrix_at(field(j, "unitary", "$"), "$.unitary");
    const json& blocks = field(j, "blocks", "$");
    if (!blocks.is_array()) parse_fail("$.blocks", "expected a block list");
    for (size_t b = 0; b < blocks.size(); ++b) {
      const std::string bp = "$.blocks[" + std::to_string(b) + "]";
      CstarExtremePayload::Block block;
      block.outcome = index_at(field(blocks[b], "outcome", bp), bp + ".outcome") - 1;
      block.factor = index_at(field(blocks[b], "factor", bp), bp + ".factor") - 1;
      block.compression = matrix_at(field(blocks[b], "compression", bp), bp + ".compression");
      payload.blocks.push_back(std::move(block));
    }
    cert.payload = std::move(payload);
  } else if (kind == "not_cstar_extreme") {
    cert.kind = CertKind::NotCstarExtreme;
    NotCstarExtremePayload payload;
    payload.outcome = index_at(field(j, "outcome", "$"), "$.outcome") - 1;
    payload.eigenvalue = number_at(field(j, "eigenvalue", "$"), "$.eigenvalue");
    payload.eigenvector = vector_at(field(j, "eigenvector", "$"), "$.eigenvector");
    cert.payload = std::move(payload);
  } else if (kind == "rn") {
    cert.kind = CertKind::Rn;
    RnPayload payload;
    payload.dominated = parse_instrument(field(j, "dominated", "$").dump());
    payload.dilation = dilation_at(field(j, "dilation", "$"), "$.dilation");
    const json& coords = field(j, "coords", "$");
    if (!coords.is_array()) parse_fail("$.coords", "expected a coordinate list");
    for (size_t t = 0; t < coords.size(); ++t)
      payload.coords.push_back(number_at(coords[t], "$.coords[" + std::to_string(t) + "]"));
    payload.d = matrix_at(field(j, "d", "$"), "$.d");
    cert.payload = std::move(payload);
  } else if (kind == "decomposable_refutation") {
    cert.kind = CertKind::DecomposableRefutation;
    DecomposableRefutationPayload payload;
    payload.outcome = index_at(field(j, "outcome", "$"), "$.outcome") - 1;
    payload.basis_index = index_at(field(j, "basis_index", "$"), "$.basis_index") - 1;
    cert.payload = std::move(payload);
  } else {
    parse_fail("$.kind", "unknown certificate kind '" + kind + "'");
  }
  return cert;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write file: " + path);
  out << content;
}

}  // namespace qiw
