#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "htsentinel/rng.hpp"
#include "htsentinel/spectra.hpp"

namespace httest {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto pattern = (std::filesystem::temp_directory_path() / "htsent-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) std::abort();
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline htsentinel::spectra::Spectrum make_spectrum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return htsentinel::spectra::Spectrum{std::move(values), n, n};
}

// Independent KS oracle: supremum over a dense grid plus both one-sided
// gaps at every sample point.
inline double brute_force_ks(const std::vector<double>& ascending, double alpha, double x_min,
                             std::size_t grid_points = 100000) {
  const double n = static_cast<double>(ascending.size());
  const double hi = ascending.back();
  double d = 0.0;
  for (std::size_t g = 0; g <= grid_points; ++g) {
    const double x = x_min + (hi - x_min) * static_cast<double>(g) / static_cast<double>(grid_points);
    const double f = 1.0 - std::pow(x / x_min, 1.0 - alpha);
    const auto it = std::upper_bound(ascending.begin(), ascending.end(), x);
    const double ecdf = static_cast<double>(it - ascending.begin()) / n;
    d = std::max(d, std::fabs(ecdf - f));
  }
  for (std::size_t i = 0; i < ascending.size(); ++i) {
    const double f = 1.0 - std::pow(ascending[i] / x_min, 1.0 - alpha);
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - f));
  }
  return d;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace httest
