#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "htsentinel/spectra.hpp"

namespace htsentinel::ingest {

enum class EntryKind { matrix, eigenvalues };

struct ManifestEntry {
  std::size_t epoch = 0;
  std::filesystem::path path;
  EntryKind kind = EntryKind::matrix;
};

// Maps checkpoint epochs to matrix or eigenvalue files for one probed matrix.
struct RunManifest {
  std::string model_label;
  std::string matrix_id;
  double c_constant = 2.0;
  std::size_t min_tail = 10;
  std::vector<ManifestEntry> entries;  // epochs unique, ascending
};

// NPY v1.0 subset: 2-D, little-endian '<f4' or '<f8', C order. Values are
// widened to 64-bit on read. Fortran-order files are rejected rather than
// silently transposed.
spectra::WeightMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const spectra::WeightMatrix& w, const std::filesystem::path& path,
                  bool as_float32 = false);

// Text format: one nonnegative decimal per line, optional "eigenvalue"
// header, LF or CRLF. The spectrum is sorted ascending and its source
// dimensions recorded as (n, n).
spectra::Spectrum read_eigenvalues(const std::filesystem::path& path);
void write_eigenvalues(const spectra::Spectrum& s, const std::filesystem::path& path);

// Manifest JSON: {model_label, matrix_id, c_constant?, min_tail?,
// entries: [{epoch, path, kind}]}. Relative entry paths are resolved
// against the manifest's directory.
RunManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace htsentinel::ingest
