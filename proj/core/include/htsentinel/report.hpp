#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "htsentinel/criterion.hpp"

namespace htsentinel::report {

// Shortest round-trip decimal representation (locale independent).
std::string format_double(double v);

struct WrittenFiles {
  std::filesystem::path csv;
  std::filesystem::path json;
};

// Writes <prefix>.csv with the header
//   epoch,alpha,x_min,n_tail,d_tilde,d_star,indicator,r_exp,p_value,heavy_tailed,phase
// and a <prefix>.json companion carrying the rule parameters, segmentation
// and stop decision. Without a segmentation the phase column is 0.
WrittenFiles write_trajectory(const criterion::Trajectory& trajectory,
                              const std::optional<criterion::PhaseSegmentation>& segmentation,
                              const criterion::StopDecision& decision,
                              const std::filesystem::path& path_prefix);

struct GroupStats {
  std::size_t first_epoch = 0;
  std::size_t count = 0;
  double alpha_mean = 0.0;
  double alpha_std = 0.0;  // population
  double xmin_mean = 0.0;
  double xmin_std = 0.0;  // population
};

// Consecutive groups of group_size records (the final group may be short).
std::vector<GroupStats> grouped_stats(const criterion::Trajectory& trajectory,
                                      std::size_t group_size);

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

enum class PlotKind { trajectory, histogram, esd_loglog };

// Standalone deterministic SVG: linear axes with one polyline per series
// (trajectory), bars from the first series (histogram), or log10-log10 axes
// with one polyline per series (esd_loglog: empirical curve plus the fitted
// straight-line overlay).
void render_plot(const std::vector<PlotSeries>& series, PlotKind kind,
                 const std::filesystem::path& path);

}  // namespace htsentinel::report
