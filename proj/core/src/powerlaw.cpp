#include "htsentinel/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "htsentinel/errors.hpp"
#include "htsentinel/rng.hpp"
#include "parallel.hpp"

namespace htsentinel::powerlaw {

namespace {

constexpr double kPi = 3.14159265358979323846;

// KS distance of an ascending range against the power-law CDF, computed
// from precomputed ln-values: F(x_j) = 1 - exp((1 - alpha)(ln x_j - ln x_min)).
double ks_from_logs(const double* logs, std::size_t n, double alpha, double log_xmin) {
  const double c = 1.0 - alpha;
  const double inv_n = 1.0 / static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(c * (logs[i] - log_xmin));
    const double hi = std::fabs(static_cast<double>(i + 1) * inv_n - f);
    const double lo = std::fabs(static_cast<double>(i) * inv_n - f);
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double ks_over_range(const double* x, std::size_t n, double alpha, double x_min) {
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(x[i]);
  return ks_from_logs(logs.data(), n, alpha, std::log(x_min));
}

double pl_log_likelihood(double alpha, double x_min, double log_ratio_sum, std::size_t n) {
  return static_cast<double>(n) * (std::log(alpha - 1.0) - std::log(x_min)) -
         alpha * log_ratio_sum;
}

double population_std(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

TailSample TailSample::from_values(std::vector<double> values, double x_min) {
  if (values.size() < 2)
    throw invalid_input_error("TailSample: need at least 2 values");
  if (!(x_min > 0.0))
    throw invalid_input_error("TailSample: x_min must be positive");
  std::sort(values.begin(), values.end());
  if (values.front() < x_min)
    throw invalid_input_error("TailSample: values must be >= x_min");
  return TailSample{x_min, std::move(values)};
}

TailSample tail_of(const spectra::Spectrum& s, double x_min) {
  const auto first = std::lower_bound(s.eigenvalues.begin(), s.eigenvalues.end(), x_min);
  return TailSample::from_values(std::vector<double>(first, s.eigenvalues.end()), x_min);
}

double fit_alpha(const TailSample& tail) {
  double log_sum = 0.0;
  for (double x : tail.values) log_sum += std::log(x / tail.x_min);
  if (!(log_sum > 0.0))
    throw degenerate_sample_error("fit_alpha: all tail values equal x_min");
  return 1.0 + static_cast<double>(tail.n_tail()) / log_sum;
}

double pl_cdf(double x, double alpha, double x_min) {
  if (!(alpha > 1.0)) throw domain_error("pl_cdf: alpha must be > 1");
  if (!(x_min > 0.0)) throw domain_error("pl_cdf: x_min must be positive");
  if (x < x_min) throw domain_error("pl_cdf: x below x_min");
  return 1.0 - std::pow(x / x_min, 1.0 - alpha);
}

double ks_distance(const TailSample& tail, double alpha) {
  if (!(alpha > 1.0)) throw domain_error("ks_distance: alpha must be > 1");
  return ks_over_range(tail.values.data(), tail.n_tail(), alpha, tail.x_min);
}

PowerLawFit fit_power_law(const TailSample& tail) {
  double log_sum = 0.0;
  for (double x : tail.values) log_sum += std::log(x / tail.x_min);
  if (!(log_sum > 0.0))
    throw degenerate_sample_error("fit_power_law: all tail values equal x_min");
  const std::size_t n = tail.n_tail();
  const double alpha = 1.0 + static_cast<double>(n) / log_sum;
  const double d = ks_over_range(tail.values.data(), n, alpha, tail.x_min);
  return PowerLawFit{alpha, tail.x_min, n, d, pl_log_likelihood(alpha, tail.x_min, log_sum, n)};
}

PowerLawFit select_xmin(const spectra::Spectrum& spectrum, std::size_t min_tail) {
  if (min_tail < 2)
    throw invalid_config_error("select_xmin: min_tail must be >= 2");
  const auto& ev = spectrum.eigenvalues;
  const auto first_pos = std::upper_bound(ev.begin(), ev.end(), 0.0);
  const std::size_t n = static_cast<std::size_t>(ev.end() - first_pos);
  if (n < min_tail)
    throw insufficient_tail_error("select_xmin: " + std::to_string(n) +
                                  " positive eigenvalues, need at least " +
                                  std::to_string(min_tail));
  const double* v = &*first_pos;

  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(v[i]);
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + logs[i];

  PowerLawFit best{};
  bool found = false;
  std::size_t i = 0;
  while (i < n) {
    const std::size_t k = n - i;
    if (k < min_tail) break;
    const double x_min = v[i];
    std::size_t j = i;
    while (j + 1 < n && v[j + 1] == x_min) ++j;  // one candidate per distinct value
    const double log_sum = suffix[i] - static_cast<double>(k) * logs[i];
    if (log_sum > 0.0) {
      const double alpha = 1.0 + static_cast<double>(k) / log_sum;
      const double d = ks_from_logs(logs.data() + i, k, alpha, logs[i]);
      if (!found || d < best.ks_d) {
        best = PowerLawFit{alpha, x_min, k, d, pl_log_likelihood(alpha, x_min, log_sum, k)};
        found = true;
      }
    }
    i = j + 1;
  }
  if (!found)
    throw degenerate_sample_error("select_xmin: no candidate with spread above x_min");
  return best;
}

ExponentialFit fit_exponential(const TailSample& tail) {
  double sum = 0.0;
  for (double x : tail.values) sum += x - tail.x_min;
  const double n = static_cast<double>(tail.n_tail());
  const double excess = sum / n;
  if (!(excess > 0.0))
    throw degenerate_sample_error("fit_exponential: sample mean equals x_min");
  const double lambda = 1.0 / excess;
  const double ll = n * std::log(lambda) - lambda * sum;
  return ExponentialFit{lambda, tail.x_min, ll};
}

LogNormalFit fit_lognormal(const TailSample& tail) {
  const std::size_t n = tail.n_tail();
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(tail.values[i]);
  double mu = 0.0;
  for (double l : logs) mu += l;
  mu /= static_cast<double>(n);
  const double sigma = population_std(logs, mu);
  if (!(sigma > 0.0))
    throw degenerate_sample_error("fit_lognormal: zero spread of ln-values");
  double log_sum = 0.0;
  for (double l : logs) log_sum += l;
  const double ll = -log_sum - static_cast<double>(n) * std::log(sigma * std::sqrt(2.0 * kPi)) -
                    static_cast<double>(n) / 2.0;
  return LogNormalFit{mu, sigma, tail.x_min, ll};
}

ComparisonResult compare_pointwise(const std::vector<double>& logp1,
                                   const std::vector<double>& logp2, double significance) {
  if (logp1.size() != logp2.size() || logp1.empty())
    throw invalid_input_error("compare_pointwise: mismatched log-likelihood vectors");
  const std::size_t n = logp1.size();
  std::vector<double> diff(n);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = logp1[i] - logp2[i];
    r += diff[i];
  }
  const double sigma = population_std(diff, r / static_cast<double>(n));
  ComparisonResult res;
  res.r = r;
  if (!(sigma > 0.0)) {
    res.normalized_r = 0.0;
    res.p_value = 1.0;
    res.winner = Winner::undecided;
    return res;
  }
  res.normalized_r = r / (sigma * std::sqrt(static_cast<double>(n)));
  res.p_value = std::erfc(std::fabs(res.normalized_r) / std::sqrt(2.0));
  if (res.r > 0.0 && res.p_value < significance)
    res.winner = Winner::power_law;
  else if (res.r < 0.0 && res.p_value < significance)
    res.winner = Winner::alternative;
  else
    res.winner = Winner::undecided;
  return res;
}

namespace {

std::vector<double> pl_log_pdf(const TailSample& tail, const PowerLawFit& pl) {
  std::vector<double> lp(tail.n_tail());
  const double c = std::log(pl.alpha - 1.0) - std::log(pl.x_min);
  for (std::size_t i = 0; i < tail.n_tail(); ++i)
    lp[i] = c - pl.alpha * std::log(tail.values[i] / pl.x_min);
  return lp;
}

}  // namespace

ComparisonResult loglik_ratio(const TailSample& tail, const PowerLawFit& pl,
                              const ExponentialFit& alt, double significance) {
  std::vector<double> lp2(tail.n_tail());
  const double c = std::log(alt.lambda);
  for (std::size_t i = 0; i < tail.n_tail(); ++i)
    lp2[i] = c - alt.lambda * (tail.values[i] - alt.x_min);
  return compare_pointwise(pl_log_pdf(tail, pl), lp2, significance);
}

ComparisonResult loglik_ratio(const TailSample& tail, const PowerLawFit& pl,
                              const LogNormalFit& alt, double significance) {
  std::vector<double> lp2(tail.n_tail());
  const double c = -std::log(alt.sigma * std::sqrt(2.0 * kPi));
  for (std::size_t i = 0; i < tail.n_tail(); ++i) {
    const double lx = std::log(tail.values[i]);
    const double z = (lx - alt.mu) / alt.sigma;
    lp2[i] = c - lx - 0.5 * z * z;
  }
  return compare_pointwise(pl_log_pdf(tail, pl), lp2, significance);
}

GoodnessOfFit bootstrap_pvalue(const spectra::Spectrum& spectrum, const PowerLawFit& fit,
                               std::size_t n_bootstrap, std::uint64_t seed,
                               std::size_t min_tail, unsigned threads) {
  if (n_bootstrap < 100)
    throw invalid_config_error("bootstrap_pvalue: n_bootstrap must be >= 100");

  std::vector<double> body;
  for (double v : spectrum.eigenvalues)
    if (v < fit.x_min) body.push_back(v);
  const std::size_t n_tail = fit.n_tail;
  const double inv_exponent = -1.0 / (fit.alpha - 1.0);

  // Stream id 1 marks bootstrap replicates; the replicate index is the
  // second component, so results are independent of the thread count.
  std::vector<double> ds(n_bootstrap);
  detail::parallel_for(n_bootstrap, threads, [&](std::size_t b) {
    RngStream rng(seed, 1, b);
    std::vector<double> sample;
    sample.reserve(body.size() + n_tail);
    for (std::size_t i = 0; i < body.size(); ++i)
      sample.push_back(body[rng.below(body.size())]);
    for (std::size_t i = 0; i < n_tail; ++i)
      sample.push_back(fit.x_min * std::pow(1.0 - rng.uniform01(), inv_exponent));
    std::sort(sample.begin(), sample.end());
    spectra::Spectrum replicate{std::move(sample), spectrum.source_rows, spectrum.source_cols};
    try {
      ds[b] = select_xmin(replicate, min_tail).ks_d;
    } catch (const error&) {
      ds[b] = std::numeric_limits<double>::infinity();
    }
  });

  std::size_t count = 0;
  for (double d : ds)
    if (d >= fit.ks_d) ++count;
  return GoodnessOfFit{static_cast<double>(count) / static_cast<double>(n_bootstrap),
                       n_bootstrap, fit.ks_d};
}

}  // namespace htsentinel::powerlaw
