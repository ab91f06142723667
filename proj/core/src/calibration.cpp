#include "htsentinel/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "htsentinel/errors.hpp"
#include "htsentinel/powerlaw.hpp"
#include "htsentinel/report.hpp"
#include "parallel.hpp"

namespace htsentinel::calibration {

namespace {

using nlohmann::json;

void validate(const CalibrationConfig& c) {
  if (c.runs < 1) throw invalid_config_error("calibration: runs must be >= 1");
  if (c.alphas.empty()) throw invalid_config_error("calibration: alphas must be nonempty");
  for (double a : c.alphas)
    if (!(a > 1.0)) throw invalid_config_error("calibration: every alpha must be > 1");
  if (c.n_tails.empty()) throw invalid_config_error("calibration: n_tails must be nonempty");
  for (std::size_t n : c.n_tails)
    if (n < 2) throw invalid_config_error("calibration: every n_tail must be >= 2");
  if (!(c.x_min > 0.0)) throw invalid_config_error("calibration: x_min must be positive");
}

Quantiles quantiles_of(const std::vector<double>& sorted) {
  return Quantiles{empirical_quantile(sorted, 0.50), empirical_quantile(sorted, 0.95),
                   empirical_quantile(sorted, 0.99), empirical_quantile(sorted, 0.999),
                   sorted.back()};
}

json quantiles_json(const Quantiles& q) {
  return json{{"p50", q.p50}, {"p95", q.p95}, {"p99", q.p99}, {"p999", q.p999}, {"max", q.max}};
}

}  // namespace

double pl_inverse_transform(double u, double alpha0, double x_min) {
  return x_min * std::pow(1.0 - u, -1.0 / (alpha0 - 1.0));
}

std::vector<double> sample_powerlaw(double alpha0, double x_min, std::size_t n,
                                    RngStream& stream) {
  if (!(alpha0 > 1.0))
    throw invalid_config_error("sample_powerlaw: alpha0 must be > 1");
  if (!(x_min > 0.0))
    throw invalid_config_error("sample_powerlaw: x_min must be positive");
  if (n == 0) throw invalid_config_error("sample_powerlaw: n must be >= 1");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = pl_inverse_transform(stream.uniform01(), alpha0, x_min);
  return out;
}

double threshold_d_star(double c, std::size_t n_tail) {
  if (!(c > 0.0)) throw domain_error("threshold_d_star: c must be positive");
  if (n_tail == 0) throw domain_error("threshold_d_star: n_tail must be >= 1");
  return c / std::sqrt(static_cast<double>(n_tail));
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw invalid_input_error("empirical_quantile: empty sample");
  if (!(p > 0.0) || p > 1.0) throw domain_error("empirical_quantile: p must be in (0, 1]");
  const double k = static_cast<double>(sorted.size());
  std::size_t idx = static_cast<std::size_t>(std::ceil(p * k));
  if (idx == 0) idx = 1;
  if (idx > sorted.size()) idx = sorted.size();
  return sorted[idx - 1];
}

CalibrationResult run_calibration(const CalibrationConfig& config, unsigned threads) {
  validate(config);

  CalibrationResult result;
  result.config = config;
  const std::size_t n_cells = config.alphas.size() * config.n_tails.size();
  result.cells.resize(n_cells);

  std::size_t ci = 0;
  for (double alpha : config.alphas) {
    for (std::size_t nt : config.n_tails) {
      result.cells[ci].alpha = alpha;
      result.cells[ci].n_tail = nt;
      result.cells[ci].s.assign(config.runs, 0.0);
      ++ci;
    }
  }

  detail::parallel_for(n_cells * config.runs, threads, [&](std::size_t flat) {
    const std::size_t cell = flat / config.runs;
    const std::size_t rep = flat % config.runs;
    auto& c = result.cells[cell];
    RngStream stream(config.seed, cell, rep);
    auto draws = sample_powerlaw(c.alpha, config.x_min, c.n_tail, stream);
    auto tail = powerlaw::TailSample::from_values(std::move(draws), config.x_min);
    const double alpha_hat = powerlaw::fit_alpha(tail);
    const double d = powerlaw::ks_distance(tail, alpha_hat);
    c.s[rep] = d * std::sqrt(static_cast<double>(c.n_tail));
  });

  std::vector<double> pooled;
  pooled.reserve(n_cells * config.runs);
  for (auto& c : result.cells) {
    std::sort(c.s.begin(), c.s.end());
    pooled.insert(pooled.end(), c.s.begin(), c.s.end());
    c.quantiles = quantiles_of(c.s);
  }
  std::sort(pooled.begin(), pooled.end());
  result.pooled = quantiles_of(pooled);

  result.dkw_c = std::sqrt(std::log(2.0 / 0.001) / 2.0);
  const double target = std::max(result.pooled.p999, result.dkw_c);
  result.recommended_c = target;  // fallback above the grid
  for (int g = 10; g <= 30; ++g) {
    const double c = static_cast<double>(g) / 10.0;
    if (c >= target - 1e-12) {
      result.recommended_c = c;
      break;
    }
  }
  return result;
}

std::string to_json(const CalibrationResult& result, bool include_samples) {
  json cfg{{"alphas", result.config.alphas},
           {"n_tails", result.config.n_tails},
           {"runs", result.config.runs},
           {"x_min", result.config.x_min},
           {"seed", result.config.seed}};
  json cells = json::array();
  for (const auto& c : result.cells) {
    json cell{{"alpha", c.alpha}, {"n_tail", c.n_tail}, {"quantiles", quantiles_json(c.quantiles)}};
    if (include_samples) cell["s"] = c.s;
    cells.push_back(std::move(cell));
  }
  json doc{{"schema", "ht-sentinel/v1"},
           {"kind", "calibration"},
           {"config", std::move(cfg)},
           {"cells", std::move(cells)},
           {"pooled", quantiles_json(result.pooled)},
           {"dkw_c", result.dkw_c},
           {"recommended_c", result.recommended_c}};
  return doc.dump(2) + "\n";
}

std::string histogram_csv(const CalibrationResult& result, double bin_width) {
  if (!(bin_width > 0.0)) throw invalid_config_error("histogram_csv: bin_width must be positive");
  std::vector<double> pooled;
  for (const auto& c : result.cells)
    pooled.insert(pooled.end(), c.s.begin(), c.s.end());
  if (pooled.empty()) throw invalid_input_error("histogram_csv: no samples");
  const double max = *std::max_element(pooled.begin(), pooled.end());
  const std::size_t bins = static_cast<std::size_t>(std::floor(max / bin_width)) + 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double s : pooled) {
    std::size_t b = static_cast<std::size_t>(std::floor(s / bin_width));
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  std::string out = "bin_left,bin_right,count\n";
  for (std::size_t b = 0; b < bins; ++b) {
    out += report::format_double(static_cast<double>(b) * bin_width);
    out += ',';
    out += report::format_double(static_cast<double>(b + 1) * bin_width);
    out += ',';
    out += std::to_string(counts[b]);
    out += '\n';
  }
  return out;
}

}  // namespace htsentinel::calibration
