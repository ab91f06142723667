#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "htsentinel/spectra.hpp"

namespace htsentinel::powerlaw {

// The portion of a sample at and above x_min, kept ascending.
struct TailSample {
  double x_min = 0.0;
  std::vector<double> values;

  // Sorts and validates: size >= 2, x_min > 0, min(values) >= x_min.
  static TailSample from_values(std::vector<double> values, double x_min);

  std::size_t n_tail() const { return values.size(); }
};

// Tail of a spectrum at and above x_min.
TailSample tail_of(const spectra::Spectrum& s, double x_min);

struct PowerLawFit {
  double alpha = 0.0;
  double x_min = 0.0;
  std::size_t n_tail = 0;
  double ks_d = 0.0;
  double log_likelihood = 0.0;
};

struct ExponentialFit {
  double lambda = 0.0;
  double x_min = 0.0;
  double log_likelihood = 0.0;
};

struct LogNormalFit {
  double mu = 0.0;
  double sigma = 0.0;
  double x_min = 0.0;
  double log_likelihood = 0.0;
};

enum class Winner { power_law, alternative, undecided };

struct ComparisonResult {
  double r = 0.0;             // sum of pointwise log-likelihood differences
  double normalized_r = 0.0;  // r / (sigma * sqrt(n))
  double p_value = 1.0;       // two-sided normal test on normalized_r
  Winner winner = Winner::undecided;
};

struct GoodnessOfFit {
  double p_value = 1.0;
  std::size_t n_bootstrap = 0;
  double observed_d = 0.0;
};

// MLE exponent for the continuous power law on [x_min, inf):
//   alpha_hat = 1 + n / sum(ln(x_i / x_min)).
// Requires at least one value strictly above x_min.
double fit_alpha(const TailSample& tail);

// CDF of the idealized power law: 1 - (x / x_min)^(1 - alpha), x >= x_min.
double pl_cdf(double x, double alpha, double x_min);

// Exact Kolmogorov-Smirnov distance via the step breakpoints:
//   max over i of max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|).
double ks_distance(const TailSample& tail, double alpha);

// Power-law fit at a fixed x_min (no scan): MLE alpha, KS distance,
// log-likelihood.
PowerLawFit fit_power_law(const TailSample& tail);

// Clauset-style scan: every distinct positive eigenvalue whose tail keeps at
// least min_tail points is tried as x_min; the fit minimizing the KS
// distance wins, ties broken by the smallest x_min.
PowerLawFit select_xmin(const spectra::Spectrum& spectrum, std::size_t min_tail = 10);

// Shifted exponential on [x_min, inf): lambda_hat = 1 / (mean - x_min).
ExponentialFit fit_exponential(const TailSample& tail);

// Log-normal MLE on ln-values. The truncation at x_min is ignored; this is
// a documented approximation used only as a comparison baseline.
LogNormalFit fit_lognormal(const TailSample& tail);

// Normalized log-likelihood ratio test (two-sided) between the fitted power
// law and an alternative fitted on the same tail.
ComparisonResult loglik_ratio(const TailSample& tail, const PowerLawFit& pl,
                              const ExponentialFit& alt, double significance = 0.1);
ComparisonResult loglik_ratio(const TailSample& tail, const PowerLawFit& pl,
                              const LogNormalFit& alt, double significance = 0.1);

// Core of the ratio test, exposed for direct use: takes the two pointwise
// log-likelihood vectors.
ComparisonResult compare_pointwise(const std::vector<double>& logp1,
                                   const std::vector<double>& logp2,
                                   double significance = 0.1);

// Semi-parametric bootstrap goodness of fit: each replicate resamples the
// empirical body (values below x_min) with replacement and draws the tail
// from the fitted power law, then refits with select_xmin and records the
// KS distance. p = fraction of replicate distances >= the observed one.
// Deterministic for a fixed seed at any thread count.
GoodnessOfFit bootstrap_pvalue(const spectra::Spectrum& spectrum, const PowerLawFit& fit,
                               std::size_t n_bootstrap, std::uint64_t seed,
                               std::size_t min_tail = 10, unsigned threads = 1);

}  // namespace htsentinel::powerlaw
