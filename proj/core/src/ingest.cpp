#include "htsentinel/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "htsentinel/errors.hpp"
#include "htsentinel/report.hpp"

namespace htsentinel::ingest {

namespace {

using nlohmann::json;

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Extracts the quoted/raw token following "'key':" in the NPY header dict.
std::string header_field(const std::string& header, const std::string& key,
                         const std::filesystem::path& path) {
  const std::string needle = "'" + key + "':";
  const auto pos = header.find(needle);
  if (pos == std::string::npos)
    throw format_error(path.string() + ": header missing key '" + key + "'");
  std::size_t i = pos + needle.size();
  while (i < header.size() && header[i] == ' ') ++i;
  std::size_t end = i;
  if (i < header.size() && header[i] == '(') {
    end = header.find(')', i);
    if (end == std::string::npos)
      throw format_error(path.string() + ": unterminated shape tuple in header");
    ++end;
  } else {
    while (end < header.size() && header[end] != ',' && header[end] != '}') ++end;
  }
  return header.substr(i, end - i);
}

std::vector<std::size_t> parse_shape(const std::string& token,
                                     const std::filesystem::path& path) {
  std::vector<std::size_t> dims;
  std::size_t i = 0;
  while (i < token.size()) {
    if (std::isdigit(static_cast<unsigned char>(token[i]))) {
      std::size_t v = 0;
      const auto* begin = token.data() + i;
      const auto* end = token.data() + token.size();
      const auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc{})
        throw format_error(path.string() + ": malformed shape in header");
      dims.push_back(v);
      i = static_cast<std::size_t>(res.ptr - token.data());
    } else {
      ++i;
    }
  }
  return dims;
}

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return s.substr(a, b - a);
}

EntryKind parse_kind(const std::string& s, const std::string& field) {
  if (s == "matrix") return EntryKind::matrix;
  if (s == "eigenvalues") return EntryKind::eigenvalues;
  throw schema_error(field + ": kind must be \"matrix\" or \"eigenvalues\"");
}

}  // namespace

spectra::WeightMatrix read_matrix(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() < 6 || std::memcmp(data.data(), kMagic, 6) != 0)
    throw format_error(path.string() + ": bad magic at offset 0");
  if (data.size() < 10)
    throw format_error(path.string() + ": truncated header at offset 6");
  if (data[6] != '\x01' || data[7] != '\x00')
    throw format_error(path.string() + ": unsupported version at offset 6");
  const std::uint16_t header_len = static_cast<std::uint8_t>(data[8]) |
                                   (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data[9])) << 8);
  const std::size_t data_offset = 10 + header_len;
  if (data.size() < data_offset)
    throw format_error(path.string() + ": truncated header at offset 10");
  const std::string header = data.substr(10, header_len);

  const std::string descr = header_field(header, "descr", path);
  const std::string order = header_field(header, "fortran_order", path);
  const auto dims = parse_shape(header_field(header, "shape", path), path);

  std::size_t elem_size = 0;
  if (descr == "'<f8'" || descr == "\"<f8\"")
    elem_size = 8;
  else if (descr == "'<f4'" || descr == "\"<f4\"")
    elem_size = 4;
  else
    throw unsupported_format_error(path.string() + ": dtype " + descr +
                                   " not supported (expect '<f4' or '<f8')");
  if (order != "False")
    throw unsupported_format_error(path.string() + ": Fortran-order arrays are rejected");
  if (dims.size() != 2)
    throw unsupported_format_error(path.string() + ": expected a 2-D array, got " +
                                   std::to_string(dims.size()) + "-D");
  const std::size_t rows = dims[0], cols = dims[1];
  if (rows == 0 || cols == 0)
    throw invalid_data_error(path.string() + ": empty array");
  const std::size_t expected = rows * cols * elem_size;
  if (data.size() - data_offset != expected)
    throw format_error(path.string() + ": payload size mismatch at offset " +
                       std::to_string(data_offset) + " (expected " + std::to_string(expected) +
                       " bytes, got " + std::to_string(data.size() - data_offset) + ")");

  std::vector<double> values(rows * cols);
  const char* p = data.data() + data_offset;
  if (elem_size == 8) {
    std::memcpy(values.data(), p, expected);
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      float f;
      std::memcpy(&f, p + i * 4, 4);
      values[i] = static_cast<double>(f);
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw invalid_data_error(path.string() + ": non-finite value at index " +
                               std::to_string(i));
  return spectra::WeightMatrix(rows, cols, std::move(values));
}

void write_matrix(const spectra::WeightMatrix& w, const std::filesystem::path& path,
                  bool as_float32) {
  std::string header = "{'descr': '";
  header += as_float32 ? "<f4" : "<f8";
  header += "', 'fortran_order': False, 'shape': (";
  header += std::to_string(w.rows) + ", " + std::to_string(w.cols) + "), }";
  // pad so the full preamble is 64-byte aligned, newline-terminated
  const std::size_t unpadded = 10 + header.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header += '\n';

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 6);
  out.put('\x01');
  out.put('\x00');
  const std::uint16_t len = static_cast<std::uint16_t>(header.size());
  out.put(static_cast<char>(len & 0xFF));
  out.put(static_cast<char>(len >> 8));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (as_float32) {
    std::vector<float> buf(w.values.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(w.values[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * 4));
  } else {
    out.write(reinterpret_cast<const char*>(w.values.data()),
              static_cast<std::streamsize>(w.values.size() * 8));
  }
  if (!out) throw io_error("write failed: " + path.string());
}

spectra::Spectrum read_eigenvalues(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string tok = strip(line);
    if (tok.empty()) continue;
    if (first && tok == "eigenvalue") {
      first = false;
      continue;
    }
    first = false;
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      throw format_error(path.string() + ": unparsable value at line " +
                         std::to_string(line_no));
    if (!std::isfinite(v) || v < 0.0)
      throw invalid_data_error(path.string() + ": negative or non-finite value at line " +
                               std::to_string(line_no));
    values.push_back(v);
  }
  if (values.empty())
    throw invalid_data_error(path.string() + ": empty spectrum");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return spectra::Spectrum{std::move(values), n, n};
}

void write_eigenvalues(const spectra::Spectrum& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << "eigenvalue\n";
  for (double v : s.eigenvalues) out << report::format_double(v) << '\n';
  if (!out) throw io_error("write failed: " + path.string());
}

RunManifest load_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw schema_error(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw schema_error(path.string() + ": top level must be an object");

  RunManifest m;
  if (!doc.contains("model_label") || !doc["model_label"].is_string())
    throw schema_error("model_label: required string");
  m.model_label = doc["model_label"].get<std::string>();
  if (!doc.contains("matrix_id") || !doc["matrix_id"].is_string())
    throw schema_error("matrix_id: required string");
  m.matrix_id = doc["matrix_id"].get<std::string>();
  if (doc.contains("c_constant")) {
    if (!doc["c_constant"].is_number() || !(doc["c_constant"].get<double>() > 0.0))
      throw schema_error("c_constant: must be a positive number");
    m.c_constant = doc["c_constant"].get<double>();
  }
  if (doc.contains("min_tail")) {
    if (!doc["min_tail"].is_number_unsigned() || doc["min_tail"].get<std::size_t>() < 2)
      throw schema_error("min_tail: must be an integer >= 2");
    m.min_tail = doc["min_tail"].get<std::size_t>();
  }
  if (!doc.contains("entries") || !doc["entries"].is_array())
    throw schema_error("entries: required array");

  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::size_t last_epoch = 0;
  bool have_last = false;
  for (std::size_t i = 0; i < doc["entries"].size(); ++i) {
    const auto& e = doc["entries"][i];
    const std::string field = "entries[" + std::to_string(i) + "]";
    if (!e.is_object()) throw schema_error(field + ": must be an object");
    if (!e.contains("epoch") || !e["epoch"].is_number_unsigned())
      throw schema_error(field + ".epoch: required nonnegative integer");
    if (!e.contains("path") || !e["path"].is_string() || e["path"].get<std::string>().empty())
      throw schema_error(field + ".path: required nonempty string");
    if (!e.contains("kind") || !e["kind"].is_string())
      throw schema_error(field + ".kind: required string");
    ManifestEntry entry;
    entry.epoch = e["epoch"].get<std::size_t>();
    entry.kind = parse_kind(e["kind"].get<std::string>(), field + ".kind");
    std::filesystem::path p = e["path"].get<std::string>();
    entry.path = p.is_absolute() ? p : dir / p;
    if (have_last) {
      if (entry.epoch == last_epoch)
        throw schema_error(field + ".epoch: duplicate epoch " + std::to_string(entry.epoch));
      if (entry.epoch < last_epoch)
        throw schema_error(field + ".epoch: epochs must be sorted ascending");
    }
    last_epoch = entry.epoch;
    have_last = true;
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back(json{{"epoch", e.epoch},
                           {"path", e.path.generic_string()},
                           {"kind", e.kind == EntryKind::matrix ? "matrix" : "eigenvalues"}});
  }
  json doc{{"model_label", manifest.model_label},
           {"matrix_id", manifest.matrix_id},
           {"c_constant", manifest.c_constant},
           {"min_tail", manifest.min_tail},
           {"entries", std::move(entries)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace htsentinel::ingest
