#pragma once

#include <cstddef>
#include <vector>

namespace htsentinel::spectra {

// Dense real weight matrix, row-major storage.
struct WeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  WeightMatrix() = default;
  // Validates dimensions, element count and finiteness.
  WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double frobenius_squared() const;
};

// Eigenvalues of X = W^T W (squared singular values of W), ascending.
// source_rows/source_cols record the orientation actually analyzed (N >= M).
struct Spectrum {
  std::vector<double> eigenvalues;
  std::size_t source_rows = 0;
  std::size_t source_cols = 0;

  std::size_t size() const { return eigenvalues.size(); }
  std::size_t positive_count() const;
};

// Empirical spectral density support of w: the squared singular values of
// the N >= M orientation of w (the transpose is analyzed when rows < cols).
// Singular values below 1e-12 times the largest are clamped, yielding an
// eigenvalue of exactly 0.
Spectrum esd(const WeightMatrix& w);

// Right-continuous empirical CDF of an ascending sample, evaluated at x.
double ecdf_at(const std::vector<double>& ascending_values, double x);

}  // namespace htsentinel::spectra
