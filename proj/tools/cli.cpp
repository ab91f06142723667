#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "htsentinel/calibration.hpp"
#include "htsentinel/criterion.hpp"
#include "htsentinel/errors.hpp"
#include "htsentinel/ingest.hpp"
#include "htsentinel/powerlaw.hpp"
#include "htsentinel/report.hpp"
#include "htsentinel/spectra.hpp"
#include "htsentinel/synth.hpp"
#include "htsentinel/theory.hpp"

namespace htsentinel::cli {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "ht-sentinel/v1";

int exit_code_for(const error& e) {
  if (dynamic_cast<const invalid_config_error*>(&e)) return 1;
  if (dynamic_cast<const numeric_error*>(&e)) return 3;
  return 2;
}

// HT_SENTINEL_THREADS caps internal parallelism; unset means machine cores.
unsigned resolve_threads() {
  const char* env = std::getenv("HT_SENTINEL_THREADS");
  if (env == nullptr || *env == '\0')
    return std::max(1u, std::thread::hardware_concurrency());
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw invalid_config_error("HT_SENTINEL_THREADS must be a positive integer");
  return static_cast<unsigned>(v);
}

bool looks_like_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  char magic[6] = {};
  in.read(magic, 6);
  return in.gcount() == 6 && magic[0] == '\x93' && magic[1] == 'N' && magic[2] == 'U' &&
         magic[3] == 'M' && magic[4] == 'P' && magic[5] == 'Y';
}

spectra::Spectrum load_spectrum(const std::filesystem::path& path) {
  if (looks_like_npy(path)) return spectra::esd(ingest::read_matrix(path));
  return ingest::read_eigenvalues(path);
}

json comparison_json(const powerlaw::ComparisonResult& c) {
  const char* winner = c.winner == powerlaw::Winner::power_law ? "power_law"
                       : c.winner == powerlaw::Winner::alternative ? "alternative"
                                                                   : "undecided";
  return json{{"r", c.r},
              {"normalized_r", c.normalized_r},
              {"p_value", c.p_value},
              {"winner", winner}};
}

struct EsdOptions {
  std::string matrix_path;
  std::string out_path;
};

int cmd_esd(const EsdOptions& opt, std::ostream& out, std::ostream& err) {
  const auto matrix = ingest::read_matrix(opt.matrix_path);
  const auto spectrum = spectra::esd(matrix);
  ingest::write_eigenvalues(spectrum, opt.out_path);

  json top = json::array();
  const auto& ev = spectrum.eigenvalues;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, ev.size()); ++i)
    top.push_back(ev[ev.size() - 1 - i]);
  err << spectrum.size() << " eigenvalues written to " << opt.out_path << "; top-5:";
  for (const auto& v : top) err << ' ' << v.get<double>();
  err << '\n';
  out << json{{"schema", kSchema},
              {"kind", "esd"},
              {"rows", matrix.rows},
              {"cols", matrix.cols},
              {"count", spectrum.size()},
              {"top", std::move(top)},
              {"out", opt.out_path}}
             .dump(2)
      << '\n';
  return 0;
}

struct FitOptions {
  std::string input_path;
  std::size_t min_tail = 10;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
  double c = 2.0;
  double significance = 0.1;
};

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.bootstrap > 0 && opt.bootstrap < 100)
    throw invalid_config_error("--bootstrap must be at least 100");
  const auto spectrum = load_spectrum(opt.input_path);
  const auto fit = powerlaw::select_xmin(spectrum, opt.min_tail);
  const auto tail = powerlaw::tail_of(spectrum, fit.x_min);
  const double d_star = calibration::threshold_d_star(opt.c, fit.n_tail);

  json doc{{"schema", kSchema},
           {"kind", "fit"},
           {"input", opt.input_path},
           {"eigenvalues", spectrum.size()},
           {"alpha", fit.alpha},
           {"x_min", fit.x_min},
           {"n_tail", fit.n_tail},
           {"ks_d", fit.ks_d},
           {"log_likelihood", fit.log_likelihood},
           {"c", opt.c},
           {"d_star", d_star},
           {"indicator", d_star - fit.ks_d},
           {"heavy_tailed", criterion::is_heavy(fit.ks_d, d_star)},
           {"min_tail", opt.min_tail}};

  try {
    const auto exp_fit = powerlaw::fit_exponential(tail);
    auto cmp = powerlaw::loglik_ratio(tail, fit, exp_fit, opt.significance);
    doc["exponential"] = json{{"lambda", exp_fit.lambda}, {"comparison", comparison_json(cmp)}};
  } catch (const degenerate_sample_error& e) {
    doc["exponential"] = json{{"error", e.what()}};
  }
  try {
    const auto ln_fit = powerlaw::fit_lognormal(tail);
    auto cmp = powerlaw::loglik_ratio(tail, fit, ln_fit, opt.significance);
    doc["log_normal"] =
        json{{"mu", ln_fit.mu}, {"sigma", ln_fit.sigma}, {"comparison", comparison_json(cmp)}};
  } catch (const degenerate_sample_error& e) {
    doc["log_normal"] = json{{"error", e.what()}};
  }
  if (opt.bootstrap > 0) {
    const auto gof = powerlaw::bootstrap_pvalue(spectrum, fit, opt.bootstrap, opt.seed,
                                                opt.min_tail, resolve_threads());
    doc["bootstrap"] = json{{"p_value", gof.p_value},
                            {"n_bootstrap", gof.n_bootstrap},
                            {"observed_d", gof.observed_d},
                            {"seed", opt.seed}};
  } else {
    doc["bootstrap"] = nullptr;
  }

  err << "alpha=" << fit.alpha << " x_min=" << fit.x_min << " n_tail=" << fit.n_tail
      << " d=" << fit.ks_d << " d*=" << d_star
      << (criterion::is_heavy(fit.ks_d, d_star) ? " heavy-tailed" : " not heavy-tailed") << '\n';
  out << doc.dump(2) << '\n';
  return 0;
}

struct CalibrateOptions {
  calibration::CalibrationConfig config;
  std::string out_path = "calibration.json";
  std::string hist_path = "calibration_hist.csv";
  bool include_samples = false;
};

int cmd_calibrate(const CalibrateOptions& opt, std::ostream& out, std::ostream& err) {
  const auto result = calibration::run_calibration(opt.config, resolve_threads());
  {
    std::ofstream f(opt.out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open " + opt.out_path + " for writing");
    f << calibration::to_json(result, opt.include_samples);
  }
  {
    std::ofstream f(opt.hist_path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open " + opt.hist_path + " for writing");
    f << calibration::histogram_csv(result);
  }
  err << "recommended C = " << result.recommended_c << " (pooled 99.9% quantile "
      << result.pooled.p999 << ", max " << result.pooled.max << ")\n";
  out << json{{"schema", kSchema},
              {"kind", "calibration-summary"},
              {"recommended_c", result.recommended_c},
              {"dkw_c", result.dkw_c},
              {"pooled",
               json{{"p50", result.pooled.p50},
                    {"p95", result.pooled.p95},
                    {"p99", result.pooled.p99},
                    {"p999", result.pooled.p999},
                    {"max", result.pooled.max}}},
              {"out", opt.out_path},
              {"hist", opt.hist_path}}
             .dump(2)
      << '\n';
  return 0;
}

struct AnalyzeOptions {
  std::string manifest_path;
  std::string mode = "offline";
  std::size_t patience = 20;
  std::string out_prefix = "trajectory";
  criterion::PhaseRuleParams rules;
  bool plots = true;
};

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
  const auto manifest = ingest::load_manifest(opt.manifest_path);

  criterion::Trajectory trajectory;
  trajectory.model_label = manifest.model_label;
  json failures = json::array();
  for (const auto& entry : manifest.entries) {
    try {
      const auto spectrum = entry.kind == ingest::EntryKind::matrix
                                ? spectra::esd(ingest::read_matrix(entry.path))
                                : ingest::read_eigenvalues(entry.path);
      trajectory.records.push_back(criterion::evaluate_epoch(
          spectrum, manifest.c_constant, manifest.min_tail, entry.epoch));
    } catch (const error& e) {
      failures.push_back(json{{"epoch", entry.epoch}, {"error", e.what()}});
    }
  }
  if (trajectory.records.empty())
    throw invalid_data_error("analyze: no usable entries in " + opt.manifest_path);

  std::optional<criterion::PhaseSegmentation> segmentation;
  if (trajectory.records.size() >= 2 * opt.rules.window)
    segmentation = criterion::classify_phases(trajectory, opt.rules);

  const auto mode =
      opt.mode == "online" ? criterion::StopMode::online : criterion::StopMode::offline;
  const auto decision = criterion::stop_epoch(trajectory, mode, opt.patience);

  const auto files = report::write_trajectory(trajectory, segmentation, decision, opt.out_prefix);

  json svgs = json::array();
  if (opt.plots) {
    std::vector<double> epochs, indicator, d_tilde, d_star;
    for (const auto& r : trajectory.records) {
      epochs.push_back(static_cast<double>(r.epoch));
      indicator.push_back(r.indicator);
      d_tilde.push_back(r.d_tilde);
      d_star.push_back(r.d_star);
    }
    const std::string ind_path = opt.out_prefix + "_indicator.svg";
    const std::string dist_path = opt.out_prefix + "_distance.svg";
    report::render_plot({{"d_star - d_tilde", epochs, indicator}},
                        report::PlotKind::trajectory, ind_path);
    report::render_plot(
        {{"d_tilde", epochs, d_tilde}, {"d_star", epochs, d_star}},
        report::PlotKind::trajectory, dist_path);
    svgs.push_back(ind_path);
    svgs.push_back(dist_path);
  }

  json seg = nullptr;
  if (segmentation)
    seg = json{{"phase1_end", segmentation->phase1_end},
               {"phase2_end", segmentation->phase2_end}};
  err << "stop epoch = " << decision.stop_epoch
      << (decision.triggered ? " (triggered)" : " (not triggered)") << ", peak indicator = "
      << decision.peak_indicator << '\n';
  out << json{{"schema", kSchema},
              {"kind", "analysis"},
              {"model_label", manifest.model_label},
              {"matrix_id", manifest.matrix_id},
              {"c_constant", manifest.c_constant},
              {"min_tail", manifest.min_tail},
              {"records", trajectory.records.size()},
              {"segmentation", std::move(seg)},
              {"stop",
               json{{"mode", opt.mode},
                    {"stop_epoch", decision.stop_epoch},
                    {"peak_indicator", decision.peak_indicator},
                    {"triggered", decision.triggered},
                    {"patience", opt.patience}}},
              {"csv", files.csv.string()},
              {"json", files.json.string()},
              {"svg", std::move(svgs)},
              {"failures", failures}}
             .dump(2)
      << '\n';
  return failures.empty() ? 0 : 2;
}

int cmd_theory(std::uint64_t seed, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  const auto report = theory::run_theory_checks(seed);
  const auto doc = theory::to_json(report);
  {
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open " + out_path + " for writing");
    f << doc;
  }
  for (const auto& c : report.checks) {
    err << (c.pass ? "PASS " : (c.informational ? "FLAG " : "FAIL ")) << c.claim
        << " (observed " << c.observed << ", bound " << c.bound << ")\n";
  }
  out << doc;
  return theory::all_required_pass(report) ? 0 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral training diagnostics for transformer weight matrices"};
  app.require_subcommand(1);

  EsdOptions esd_opt;
  auto* esd_cmd = app.add_subcommand("esd", "Eigenvalues of W^T W from an NPY matrix");
  esd_cmd->add_option("matrix", esd_opt.matrix_path, "input NPY matrix")->required();
  esd_cmd->add_option("out", esd_opt.out_path, "output eigenvalue text file")->required();

  FitOptions fit_opt;
  auto* fit_cmd = app.add_subcommand("fit", "Power-law tail fit of a matrix or eigenvalue file");
  fit_cmd->add_option("input", fit_opt.input_path, "NPY matrix or eigenvalue text file")
      ->required();
  fit_cmd->add_option("--min-tail", fit_opt.min_tail, "smallest admissible tail size");
  fit_cmd->add_option("--bootstrap", fit_opt.bootstrap,
                      "bootstrap replicates for the goodness-of-fit p-value (>= 100)");
  fit_cmd->add_option("--seed", fit_opt.seed, "bootstrap seed");
  fit_cmd->add_option("--c", fit_opt.c, "critical constant for d*");
  fit_cmd->add_option("--significance", fit_opt.significance,
                      "significance threshold for the ratio test");

  CalibrateOptions cal_opt;
  auto* cal_cmd = app.add_subcommand("calibrate", "Monte Carlo calibration of the constant C");
  cal_cmd->add_option("--alphas", cal_opt.config.alphas, "power-law exponents");
  cal_cmd->add_option("--ntails", cal_opt.config.n_tails, "tail sizes");
  cal_cmd->add_option("--runs", cal_opt.config.runs, "replicates per cell");
  cal_cmd->add_option("--seed", cal_opt.config.seed, "rng seed");
  cal_cmd->add_option("--xmin", cal_opt.config.x_min, "fixed lower bound");
  cal_cmd->add_option("--out", cal_opt.out_path, "output JSON path");
  cal_cmd->add_option("--hist", cal_opt.hist_path, "output histogram CSV path");
  cal_cmd->add_flag("--include-samples", cal_opt.include_samples,
                    "embed the sorted S arrays in the JSON");

  AnalyzeOptions an_opt;
  auto* an_cmd = app.add_subcommand("analyze", "Per-epoch pipeline over a run manifest");
  an_cmd->add_option("manifest", an_opt.manifest_path, "manifest JSON")->required();
  an_cmd->add_option("--mode", an_opt.mode, "stop rule mode")
      ->check(CLI::IsMember({"offline", "online"}));
  an_cmd->add_option("--patience", an_opt.patience, "online patience in records");
  an_cmd->add_option("--out-prefix", an_opt.out_prefix, "output path prefix");
  an_cmd->add_option("--window", an_opt.rules.window, "phase rule window w");
  an_cmd->add_option("--tau-alpha", an_opt.rules.alpha_std_threshold,
                     "alpha stability threshold");
  an_cmd->add_option("--alpha-ceiling", an_opt.rules.alpha_ceiling, "alpha ceiling A");
  an_cmd->add_option("--tau-x", an_opt.rules.xmin_trend_threshold, "x_min trend threshold");
  an_cmd->add_flag("!--no-plots", an_opt.plots, "skip SVG plots");

  auto* synth_cmd = app.add_subcommand("synth", "Synthetic generators");
  synth_cmd->require_subcommand(1);

  synth::TrajectorySpec traj_spec;
  std::string traj_out = "synth_traj";
  auto* traj_cmd = synth_cmd->add_subcommand("trajectory", "Three-phase synthetic run");
  traj_cmd->add_option("--epochs", traj_spec.epochs, "epoch count");
  traj_cmd->add_option("--b1", traj_spec.phase1_boundary, "last epoch of phase I");
  traj_cmd->add_option("--b2", traj_spec.phase2_boundary, "last epoch of phase II");
  traj_cmd->add_option("--rows", traj_spec.rows, "matrix rows");
  traj_cmd->add_option("--cols", traj_spec.cols, "matrix cols");
  traj_cmd->add_option("--seed", traj_spec.seed, "rng seed");
  traj_cmd->add_option("--out-dir", traj_out, "output directory");

  struct {
    std::size_t rows = 400, cols = 400;
    double sigma = 1.0, tail_alpha = 2.5;
    std::uint64_t seed = 0;
    std::string out = "matrix.npy";
  } mat_opt;
  auto* gauss_cmd = synth_cmd->add_subcommand("gaussian", "i.i.d. Gaussian matrix");
  gauss_cmd->add_option("--rows", mat_opt.rows);
  gauss_cmd->add_option("--cols", mat_opt.cols);
  gauss_cmd->add_option("--sigma", mat_opt.sigma);
  gauss_cmd->add_option("--seed", mat_opt.seed);
  gauss_cmd->add_option("--out", mat_opt.out);
  auto* heavy_cmd = synth_cmd->add_subcommand("heavytail", "Pareto-scaled Gaussian matrix");
  heavy_cmd->add_option("--rows", mat_opt.rows);
  heavy_cmd->add_option("--cols", mat_opt.cols);
  heavy_cmd->add_option("--tail-alpha", mat_opt.tail_alpha);
  heavy_cmd->add_option("--seed", mat_opt.seed);
  heavy_cmd->add_option("--out", mat_opt.out);

  struct {
    std::string dist = "power_law";
    synth::DistParams params;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out = "draws.txt";
  } dist_opt;
  auto* dist_cmd = synth_cmd->add_subcommand("distribution", "Seeded draws from a distribution");
  dist_cmd->add_option("--dist", dist_opt.dist)
      ->check(CLI::IsMember({"power_law", "exponential", "log_normal"}));
  dist_cmd->add_option("--n", dist_opt.n);
  dist_cmd->add_option("--alpha", dist_opt.params.alpha);
  dist_cmd->add_option("--xmin", dist_opt.params.x_min);
  dist_cmd->add_option("--lambda", dist_opt.params.lambda);
  dist_cmd->add_option("--mu", dist_opt.params.mu);
  dist_cmd->add_option("--sigma", dist_opt.params.sigma);
  dist_cmd->add_option("--seed", dist_opt.seed);
  dist_cmd->add_option("--out", dist_opt.out);

  std::uint64_t theory_seed = 0;
  std::string theory_out = "theory_report.json";
  auto* theory_cmd = app.add_subcommand("theory", "Numerical checks of the convexity and smoothness claims");
  theory_cmd->add_option("--seed", theory_seed);
  theory_cmd->add_option("--out", theory_out, "output JSON path");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("ht-sentinel");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    if (*esd_cmd) return cmd_esd(esd_opt, out, err);
    if (*fit_cmd) return cmd_fit(fit_opt, out, err);
    if (*cal_cmd) return cmd_calibrate(cal_opt, out, err);
    if (*an_cmd) return cmd_analyze(an_opt, out, err);
    if (*theory_cmd) return cmd_theory(theory_seed, theory_out, out, err);
    if (*traj_cmd) {
      const auto manifest = synth::gen_trajectory(traj_spec, traj_out);
      err << manifest.entries.size() << " matrices written to " << traj_out << '\n';
      out << json{{"schema", kSchema},
                  {"kind", "synth-trajectory"},
                  {"files", manifest.entries.size()},
                  {"min_tail", manifest.min_tail},
                  {"manifest", (std::filesystem::path(traj_out) / "manifest.json").string()}}
                 .dump(2)
          << '\n';
      return 0;
    }
    if (*gauss_cmd || *heavy_cmd) {
      const auto w = *gauss_cmd
                         ? synth::gen_gaussian_matrix(mat_opt.rows, mat_opt.cols, mat_opt.sigma,
                                                      mat_opt.seed)
                         : synth::gen_heavytail_matrix(mat_opt.rows, mat_opt.cols,
                                                       mat_opt.tail_alpha, mat_opt.seed);
      ingest::write_matrix(w, mat_opt.out);
      err << mat_opt.rows << "x" << mat_opt.cols << " matrix written to " << mat_opt.out << '\n';
      out << json{{"schema", kSchema},
                  {"kind", *gauss_cmd ? "synth-gaussian" : "synth-heavytail"},
                  {"rows", mat_opt.rows},
                  {"cols", mat_opt.cols},
                  {"out", mat_opt.out}}
                 .dump(2)
          << '\n';
      return 0;
    }
    if (*dist_cmd) {
      const auto kind = dist_opt.dist == "power_law"     ? synth::DistKind::power_law
                        : dist_opt.dist == "exponential" ? synth::DistKind::exponential
                                                         : synth::DistKind::log_normal;
      const auto draws = synth::gen_distribution(kind, dist_opt.params, dist_opt.n, dist_opt.seed);
      std::ofstream f(dist_opt.out, std::ios::binary | std::ios::trunc);
      if (!f) throw io_error("cannot open " + dist_opt.out + " for writing");
      for (double v : draws) f << report::format_double(v) << '\n';
      err << draws.size() << " draws written to " << dist_opt.out << '\n';
      out << json{{"schema", kSchema},
                  {"kind", "synth-distribution"},
                  {"dist", dist_opt.dist},
                  {"n", draws.size()},
                  {"out", dist_opt.out}}
                 .dump(2)
          << '\n';
      return 0;
    }
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace htsentinel::cli
