#include "htsentinel/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htsentinel/calibration.hpp"
#include "htsentinel/errors.hpp"

namespace htsentinel::criterion {

namespace {

void validate(const Trajectory& t) {
  if (t.records.empty()) throw invalid_input_error("trajectory: no records");
  for (std::size_t i = 1; i < t.records.size(); ++i)
    if (t.records[i].epoch <= t.records[i - 1].epoch)
      throw invalid_input_error("trajectory: epochs must be strictly increasing");
}

double rolling_alpha_std(const std::vector<EpochRecord>& r, std::size_t end, std::size_t w) {
  double mean = 0.0;
  for (std::size_t i = end + 1 - w; i <= end; ++i) mean += r[i].alpha;
  mean /= static_cast<double>(w);
  double acc = 0.0;
  for (std::size_t i = end + 1 - w; i <= end; ++i) {
    const double d = r[i].alpha - mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(w));
}

// Least-squares slope of x_min against the record index over the trailing window.
double xmin_slope(const std::vector<EpochRecord>& r, std::size_t end, std::size_t w) {
  const double xbar = static_cast<double>(w - 1) / 2.0;
  double ybar = 0.0;
  for (std::size_t i = 0; i < w; ++i) ybar += r[end + 1 - w + i].x_min;
  ybar /= static_cast<double>(w);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    const double dx = static_cast<double>(i) - xbar;
    num += dx * (r[end + 1 - w + i].x_min - ybar);
    den += dx * dx;
  }
  return num / den;
}

}  // namespace

EpochRecord evaluate_epoch(const spectra::Spectrum& spectrum, double c,
                           std::size_t min_tail, std::size_t epoch) {
  const auto fit = powerlaw::select_xmin(spectrum, min_tail);
  EpochRecord rec;
  rec.epoch = epoch;
  rec.alpha = fit.alpha;
  rec.x_min = fit.x_min;
  rec.n_tail = fit.n_tail;
  rec.d_tilde = fit.ks_d;
  rec.d_star = calibration::threshold_d_star(c, fit.n_tail);
  rec.indicator = rec.d_star - rec.d_tilde;
  rec.heavy_tailed = is_heavy(rec.d_tilde, rec.d_star);

  const auto tail = powerlaw::tail_of(spectrum, fit.x_min);
  try {
    const auto exp_fit = powerlaw::fit_exponential(tail);
    const auto cmp = powerlaw::loglik_ratio(tail, fit, exp_fit);
    rec.r_exp = cmp.r;
    rec.p_value = cmp.p_value;
  } catch (const degenerate_sample_error&) {
    rec.r_exp = 0.0;
    rec.p_value = 1.0;
  }
  return rec;
}

StopDecision stop_epoch(const Trajectory& trajectory, StopMode mode,
                        std::optional<std::size_t> patience) {
  validate(trajectory);
  const auto& r = trajectory.records;

  StopDecision d;
  d.mode = mode;

  if (mode == StopMode::offline) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.size(); ++i)
      if (r[i].indicator > r[best].indicator) best = i;
    d.stop_epoch = r[best].epoch;
    d.peak_indicator = r[best].indicator;
    d.triggered = d.peak_indicator > 0.0;
    return d;
  }

  std::size_t best = 0;
  std::size_t stale = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0 && r[i].indicator > r[best].indicator) {
      best = i;
      stale = 0;
    } else if (i > 0) {
      ++stale;
    }
    if (patience && r[best].indicator > 0.0 && stale >= *patience) {
      d.stop_epoch = r[best].epoch;
      d.peak_indicator = r[best].indicator;
      d.triggered = true;
      return d;
    }
  }
  d.stop_epoch = r[best].epoch;
  d.peak_indicator = r[best].indicator;
  d.triggered = false;
  return d;
}

PhaseSegmentation classify_phases(const Trajectory& trajectory, const PhaseRuleParams& params) {
  validate(trajectory);
  const auto& r = trajectory.records;
  const std::size_t w = params.window;
  if (w < 2) throw invalid_config_error("classify_phases: window must be >= 2");
  if (r.size() < 2 * w)
    throw invalid_input_error("classify_phases: trajectory shorter than two windows");

  const std::size_t last_epoch = r.back().epoch;
  PhaseSegmentation seg;
  seg.rule_params = params;
  seg.phase1_end = last_epoch;
  seg.phase2_end = last_epoch;

  std::size_t p1_idx = r.size();  // sentinel: not found
  for (std::size_t i = w - 1; i < r.size(); ++i) {
    if (rolling_alpha_std(r, i, w) < params.alpha_std_threshold &&
        r[i].alpha < params.alpha_ceiling) {
      p1_idx = i;
      break;
    }
  }
  if (p1_idx == r.size()) return seg;  // both boundaries clamp to the end
  seg.phase1_end = r[p1_idx].epoch;

  std::size_t run = 0;
  for (std::size_t j = std::max(p1_idx + 1, w - 1); j < r.size(); ++j) {
    if (xmin_slope(r, j, w) > params.xmin_trend_threshold) {
      ++run;
      if (run >= w) {
        seg.phase2_end = r[j - w].epoch;  // record before the sustained run
        return seg;
      }
    } else {
      run = 0;
    }
  }
  return seg;  // Phase III never starts; phase2_end stays clamped
}

int phase_of(const PhaseSegmentation& seg, std::size_t epoch) {
  if (epoch <= seg.phase1_end) return 1;
  if (epoch <= seg.phase2_end) return 2;
  return 3;
}

}  // namespace htsentinel::criterion
