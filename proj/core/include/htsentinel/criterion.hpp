#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "htsentinel/powerlaw.hpp"
#include "htsentinel/spectra.hpp"

namespace htsentinel::criterion {

// One epoch's fit and heavy-tail verdict.
struct EpochRecord {
  std::size_t epoch = 0;
  double alpha = 0.0;
  double x_min = 0.0;
  std::size_t n_tail = 0;
  double d_tilde = 0.0;    // empirical KS distance of the selected fit
  double d_star = 0.0;     // c / sqrt(n_tail)
  double indicator = 0.0;  // d_star - d_tilde
  double r_exp = 0.0;      // log-likelihood ratio vs the exponential baseline
  double p_value = 1.0;    // two-sided p of the normalized ratio
  bool heavy_tailed = false;
};

struct Trajectory {
  std::vector<EpochRecord> records;  // strictly increasing epochs
  std::string model_label;
};

struct PhaseRuleParams {
  std::size_t window = 5;             // w, counted in records
  double alpha_std_threshold = 0.25;  // tau_alpha
  double alpha_ceiling = 3.0;         // A
  double xmin_trend_threshold = 0.0;  // tau_x
};

struct PhaseSegmentation {
  std::size_t phase1_end = 0;  // epoch of the last Phase I record
  std::size_t phase2_end = 0;  // epoch of the last Phase II record
  PhaseRuleParams rule_params;
};

enum class StopMode { offline, online };

struct StopDecision {
  std::size_t stop_epoch = 0;
  double peak_indicator = 0.0;
  StopMode mode = StopMode::offline;
  bool triggered = false;
};

// Heavy-tail verdict: heavy-tailed iff d_tilde <= d_star (inclusive).
inline bool is_heavy(double d_tilde, double d_star) { return d_tilde <= d_star; }

// Full per-epoch evaluation: select_xmin fit, d* from the fit's tail size,
// indicator, and the likelihood-ratio comparison against the exponential
// fit on the same tail.
EpochRecord evaluate_epoch(const spectra::Spectrum& spectrum, double c,
                           std::size_t min_tail, std::size_t epoch = 0);

// Early-stopping decision over max_epoch{d* - d_tilde}.
//
// offline: argmax of the indicator, earliest epoch on ties; triggered iff
// the peak is positive. online: scan in epoch order and trigger at the
// first record where the positive running max has not improved for
// `patience` consecutive records; stop_epoch is the argmax so far.
// patience = nullopt never triggers.
StopDecision stop_epoch(const Trajectory& trajectory, StopMode mode,
                        std::optional<std::size_t> patience = 20);

// Three-phase segmentation. Phase I ends at the first record where the
// rolling population std of alpha over the window drops below tau_alpha
// while alpha sits below the ceiling; Phase III begins after the
// least-squares slope of x_min over the window stays above tau_x for a full
// window of consecutive positions. Unmet boundaries clamp to the last epoch.
PhaseSegmentation classify_phases(const Trajectory& trajectory,
                                  const PhaseRuleParams& params = {});

// Phase label (1, 2 or 3) of an epoch under a segmentation.
int phase_of(const PhaseSegmentation& seg, std::size_t epoch);

}  // namespace htsentinel::criterion
