#include "htsentinel/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "htsentinel/errors.hpp"

namespace htsentinel::report {

namespace {

using nlohmann::json;

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 20.0, kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log10 = false;

  double to_px(double v, double px_lo, double px_hi) const {
    double t = log10 ? std::log10(v) : v;
    double a = log10 ? std::log10(lo) : lo;
    double b = log10 ? std::log10(hi) : hi;
    if (b == a) b = a + 1.0;
    return px_lo + (t - a) / (b - a) * (px_hi - px_lo);
  }
};

void expand(double v, double& lo, double& hi) {
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n"
         "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
}

void draw_axes(std::string& out, const Axis& x, const Axis& y) {
  out += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" + format_double(kHeight - kBottom) +
         "\" x2=\"" + format_double(kWidth - kRight) + "\" y2=\"" +
         format_double(kHeight - kBottom) + "\" stroke=\"#000000\"/>\n";
  out += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" + format_double(kTop) + "\" x2=\"" +
         format_double(kLeft) + "\" y2=\"" + format_double(kHeight - kBottom) +
         "\" stroke=\"#000000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = static_cast<double>(t) / 4.0;
    double vx, vy;
    if (x.log10) {
      const double a = std::log10(x.lo), b = std::log10(x.hi);
      vx = std::pow(10.0, a + fx * (b - a));
    } else {
      vx = x.lo + fx * (x.hi - x.lo);
    }
    if (y.log10) {
      const double a = std::log10(y.lo), b = std::log10(y.hi);
      vy = std::pow(10.0, a + fx * (b - a));
    } else {
      vy = y.lo + fx * (y.hi - y.lo);
    }
    const double px = kLeft + fx * (kWidth - kLeft - kRight);
    const double py = (kHeight - kBottom) - fx * (kHeight - kTop - kBottom);
    out += "<line x1=\"" + format_double(px) + "\" y1=\"" + format_double(kHeight - kBottom) +
           "\" x2=\"" + format_double(px) + "\" y2=\"" +
           format_double(kHeight - kBottom + 5) + "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + format_double(px) + "\" y=\"" + format_double(kHeight - kBottom + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + format_double(vx) + "</text>\n";
    out += "<line x1=\"" + format_double(kLeft - 5) + "\" y1=\"" + format_double(py) +
           "\" x2=\"" + format_double(kLeft) + "\" y2=\"" + format_double(py) +
           "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + format_double(kLeft - 8) + "\" y=\"" + format_double(py + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + format_double(vy) + "</text>\n";
  }
}

void write_file(const std::string& content, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

WrittenFiles write_trajectory(const criterion::Trajectory& trajectory,
                              const std::optional<criterion::PhaseSegmentation>& segmentation,
                              const criterion::StopDecision& decision,
                              const std::filesystem::path& path_prefix) {
  WrittenFiles files{path_prefix.string() + ".csv", path_prefix.string() + ".json"};

  std::string csv =
      "epoch,alpha,x_min,n_tail,d_tilde,d_star,indicator,r_exp,p_value,heavy_tailed,phase\n";
  for (const auto& r : trajectory.records) {
    csv += std::to_string(r.epoch) + ',';
    csv += format_double(r.alpha) + ',';
    csv += format_double(r.x_min) + ',';
    csv += std::to_string(r.n_tail) + ',';
    csv += format_double(r.d_tilde) + ',';
    csv += format_double(r.d_star) + ',';
    csv += format_double(r.indicator) + ',';
    csv += format_double(r.r_exp) + ',';
    csv += format_double(r.p_value) + ',';
    csv += r.heavy_tailed ? "true," : "false,";
    csv += std::to_string(segmentation ? criterion::phase_of(*segmentation, r.epoch) : 0);
    csv += '\n';
  }
  write_file(csv, files.csv);

  json seg = nullptr;
  json rules = nullptr;
  if (segmentation) {
    seg = json{{"phase1_end", segmentation->phase1_end},
               {"phase2_end", segmentation->phase2_end}};
    rules = json{{"window", segmentation->rule_params.window},
                 {"alpha_std_threshold", segmentation->rule_params.alpha_std_threshold},
                 {"alpha_ceiling", segmentation->rule_params.alpha_ceiling},
                 {"xmin_trend_threshold", segmentation->rule_params.xmin_trend_threshold}};
  }
  json doc{{"schema", "ht-sentinel/v1"},
           {"kind", "trajectory"},
           {"model_label", trajectory.model_label},
           {"records", trajectory.records.size()},
           {"rule_params", std::move(rules)},
           {"segmentation", std::move(seg)},
           {"stop",
            json{{"mode", decision.mode == criterion::StopMode::offline ? "offline" : "online"},
                 {"stop_epoch", decision.stop_epoch},
                 {"peak_indicator", decision.peak_indicator},
                 {"triggered", decision.triggered}}}};
  write_file(doc.dump(2) + "\n", files.json);
  return files;
}

std::vector<GroupStats> grouped_stats(const criterion::Trajectory& trajectory,
                                      std::size_t group_size) {
  if (group_size == 0) throw invalid_config_error("grouped_stats: group_size must be >= 1");
  if (trajectory.records.empty()) throw invalid_input_error("grouped_stats: empty trajectory");

  std::vector<GroupStats> out;
  const auto& r = trajectory.records;
  for (std::size_t g = 0; g < r.size(); g += group_size) {
    const std::size_t end = std::min(r.size(), g + group_size);
    const double n = static_cast<double>(end - g);
    GroupStats s;
    s.first_epoch = r[g].epoch;
    s.count = end - g;
    for (std::size_t i = g; i < end; ++i) {
      s.alpha_mean += r[i].alpha;
      s.xmin_mean += r[i].x_min;
    }
    s.alpha_mean /= n;
    s.xmin_mean /= n;
    for (std::size_t i = g; i < end; ++i) {
      s.alpha_std += (r[i].alpha - s.alpha_mean) * (r[i].alpha - s.alpha_mean);
      s.xmin_std += (r[i].x_min - s.xmin_mean) * (r[i].x_min - s.xmin_mean);
    }
    s.alpha_std = std::sqrt(s.alpha_std / n);
    s.xmin_std = std::sqrt(s.xmin_std / n);
    out.push_back(s);
  }
  return out;
}

void render_plot(const std::vector<PlotSeries>& series, PlotKind kind,
                 const std::filesystem::path& path) {
  if (series.empty()) throw invalid_input_error("render_plot: no series");
  for (const auto& s : series) {
    if (s.xs.empty() || s.xs.size() != s.ys.size())
      throw invalid_input_error("render_plot: series '" + s.label + "' empty or ragged");
  }

  const bool loglog = kind == PlotKind::esd_loglog;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (loglog && (s.xs[i] <= 0.0 || s.ys[i] <= 0.0))
        throw invalid_input_error("render_plot: log-log plot requires positive values");
      expand(s.xs[i], xlo, xhi);
      expand(s.ys[i], ylo, yhi);
    }
  }
  if (kind == PlotKind::histogram) ylo = std::min(ylo, 0.0);

  Axis x{xlo, xhi, loglog};
  Axis y{ylo, yhi, loglog};

  std::string out = svg_open();
  draw_axes(out, x, y);

  const double px_lo = kLeft, px_hi = kWidth - kRight;
  const double py_lo = kHeight - kBottom, py_hi = kTop;

  if (kind == PlotKind::histogram) {
    const auto& s = series.front();
    const double width = s.xs.size() > 1 ? s.xs[1] - s.xs[0] : (xhi - xlo > 0 ? xhi - xlo : 1.0);
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double x0 = x.to_px(s.xs[i], px_lo, px_hi);
      const double x1 = x.to_px(std::min(s.xs[i] + width, xhi), px_lo, px_hi);
      const double y1 = y.to_px(s.ys[i], py_lo, py_hi);
      const double y0 = y.to_px(std::max(0.0, ylo), py_lo, py_hi);
      out += "<rect x=\"" + format_double(x0) + "\" y=\"" + format_double(y1) + "\" width=\"" +
             format_double(std::max(0.5, x1 - x0)) + "\" height=\"" +
             format_double(std::max(0.0, y0 - y1)) + "\" fill=\"" + kPalette[0] +
             "\" stroke=\"#ffffff\"/>\n";
    }
  } else {
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto& s = series[k];
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (i) pts += ' ';
        pts += format_double(x.to_px(s.xs[i], px_lo, px_hi));
        pts += ',';
        pts += format_double(y.to_px(s.ys[i], py_lo, py_hi));
      }
      out += "<polyline fill=\"none\" stroke=\"";
      out += kPalette[k % 6];
      out += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
      out += "<text x=\"" + format_double(px_hi - 150.0) + "\" y=\"" +
             format_double(kTop + 14.0 + 14.0 * static_cast<double>(k)) +
             "\" font-size=\"11\" fill=\"" + kPalette[k % 6] + "\">" + s.label + "</text>\n";
    }
  }
  out += "</svg>\n";
  write_file(out, path);
}

}  // namespace htsentinel::report
