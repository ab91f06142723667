#include "htsentinel/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "htsentinel/errors.hpp"

namespace htsentinel::spectra {

WeightMatrix::WeightMatrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (rows == 0 || cols == 0)
    throw invalid_input_error("WeightMatrix: rows and cols must be >= 1");
  if (values.size() != rows * cols)
    throw invalid_input_error("WeightMatrix: expected " + std::to_string(rows * cols) +
                              " values, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw invalid_input_error("WeightMatrix: non-finite value at index " + std::to_string(i));
  }
}

double WeightMatrix::frobenius_squared() const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return sum;
}

std::size_t Spectrum::positive_count() const {
  return static_cast<std::size_t>(
      eigenvalues.end() - std::upper_bound(eigenvalues.begin(), eigenvalues.end(), 0.0));
}

Spectrum esd(const WeightMatrix& w) {
  const bool transpose = w.rows < w.cols;
  const std::size_t n = transpose ? w.cols : w.rows;  // N >= M
  const std::size_t m = transpose ? w.rows : w.cols;

  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < w.rows; ++i) {
    for (std::size_t j = 0; j < w.cols; ++j) {
      if (transpose)
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w.at(i, j);
      else
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w.at(i, j);
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  if (svd.info() != Eigen::Success)
    throw numeric_error("esd: singular value decomposition did not converge");

  const auto& sv = svd.singularValues();  // descending
  const double clamp = sv.size() > 0 ? sv(0) * 1e-12 : 0.0;

  std::vector<double> eig(m);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double s = sv(i) < clamp ? 0.0 : sv(i);
    eig[m - 1 - static_cast<std::size_t>(i)] = s * s;
  }
  return Spectrum{std::move(eig), n, m};
}

double ecdf_at(const std::vector<double>& values, double x) {
  if (values.empty()) throw invalid_input_error("ecdf_at: empty sample");
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  return static_cast<double>(it - values.begin()) / static_cast<double>(values.size());
}

}  // namespace htsentinel::spectra
