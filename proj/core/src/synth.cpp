#include "htsentinel/synth.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "htsentinel/calibration.hpp"
#include "htsentinel/errors.hpp"
#include "htsentinel/rng.hpp"

namespace htsentinel::synth {

namespace {

// Inverse transform on [lo, hi] for the power law truncated from above.
double truncated_pl_draw(RngStream& rng, double alpha, double lo, double hi) {
  const double a = alpha - 1.0;
  const double top = 1.0 - std::pow(hi / lo, -a);
  return lo * std::pow(1.0 - rng.uniform01() * top, -1.0 / a);
}

void validate_spec(const TrajectorySpec& spec) {
  if (spec.epochs == 0) throw invalid_config_error("trajectory: epochs must be >= 1");
  if (spec.phase1_boundary < 1 || spec.phase1_boundary >= spec.phase2_boundary)
    throw invalid_config_error("trajectory: need 1 <= phase1_boundary < phase2_boundary");
  if (spec.rows == 0 || spec.cols == 0)
    throw invalid_config_error("trajectory: dims must be >= 1");
  if (!(spec.phase2_alpha > 1.0) || !(spec.phase3_alpha_target > 1.0))
    throw invalid_config_error("trajectory: schedule alphas must be > 1");
}

Eigen::MatrixXd gaussian_matrix(RngStream& rng, Eigen::Index n, Eigen::Index m) {
  Eigen::MatrixXd g(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = rng.normal();
  return g;
}

// Thin orthogonal factor from the QR of a Gaussian matrix.
Eigen::MatrixXd random_orthogonal(RngStream& rng, Eigen::Index n, Eigen::Index m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, n, m));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
}

}  // namespace

std::vector<double> gen_distribution(DistKind kind, const DistParams& params, std::size_t n,
                                     std::uint64_t seed) {
  if (n == 0) throw invalid_config_error("gen_distribution: n must be >= 1");
  RngStream stream(seed, 0, 0);
  std::vector<double> out;
  switch (kind) {
    case DistKind::power_law:
      out = calibration::sample_powerlaw(params.alpha, params.x_min, n, stream);
      break;
    case DistKind::exponential: {
      if (!(params.lambda > 0.0))
        throw invalid_config_error("gen_distribution: lambda must be positive");
      out.resize(n);
      for (auto& v : out) v = -std::log(stream.uniform01inc()) / params.lambda;
      break;
    }
    case DistKind::log_normal: {
      if (!(params.sigma > 0.0))
        throw invalid_config_error("gen_distribution: sigma must be positive");
      out.resize(n);
      for (auto& v : out) v = std::exp(params.mu + params.sigma * stream.normal());
      break;
    }
  }
  return out;
}

spectra::WeightMatrix gen_gaussian_matrix(std::size_t n, std::size_t m, double sigma,
                                          std::uint64_t seed) {
  if (n == 0 || m == 0) throw invalid_config_error("gen_gaussian_matrix: dims must be >= 1");
  if (!(sigma > 0.0)) throw invalid_config_error("gen_gaussian_matrix: sigma must be positive");
  RngStream stream(seed, 0, 0);
  std::vector<double> values(n * m);
  for (auto& v : values) v = sigma * stream.normal();
  return spectra::WeightMatrix(n, m, std::move(values));
}

spectra::WeightMatrix gen_heavytail_matrix(std::size_t n, std::size_t m, double tail_alpha,
                                           std::uint64_t seed) {
  if (n == 0 || m == 0) throw invalid_config_error("gen_heavytail_matrix: dims must be >= 1");
  if (!(tail_alpha > 1.0))
    throw invalid_config_error("gen_heavytail_matrix: tail_alpha must be > 1");
  RngStream gstream(seed, 0, 0);
  RngStream sstream(seed, 1, 0);
  const auto scales = calibration::sample_powerlaw(tail_alpha, 1.0, m, sstream);
  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) values[i * m + j] = gstream.normal() * scales[j];
  return spectra::WeightMatrix(n, m, std::move(values));
}

std::vector<double> trajectory_spectrum(const TrajectorySpec& spec, std::size_t epoch) {
  validate_spec(spec);
  if (epoch < 1 || epoch > spec.epochs)
    throw invalid_config_error("trajectory_spectrum: epoch out of range");

  const std::size_t m = std::min(spec.rows, spec.cols);
  const std::size_t n_tail = m / 2;
  const std::size_t n_bulk = m - n_tail;
  RngStream rng(spec.seed, epoch, 2);
  std::vector<double> eig;
  eig.reserve(m);

  if (epoch <= spec.phase1_boundary) {
    const double u0 = spec.phase1_scale *
                      std::exp(rng.uniform(-spec.phase1_scale_log_jitter,
                                           spec.phase1_scale_log_jitter));
    const double sig = rng.uniform(spec.phase1_sigma_lo, spec.phase1_sigma_hi);
    for (std::size_t i = 0; i < n_bulk; ++i)
      eig.push_back(u0 * (0.28 + 0.02 * rng.uniform01()));
    for (std::size_t i = 0; i < n_tail; ++i)
      eig.push_back(u0 * std::exp(sig * std::fabs(rng.normal())));
  } else {
    double onset, alpha, cap_rel = 0.0;
    bool capped = false;
    if (epoch <= spec.phase2_boundary) {
      const double t = static_cast<double>(epoch - spec.phase1_boundary);
      onset = spec.phase2_onset * std::pow(spec.phase2_onset_decay, t);
      alpha = spec.phase2_alpha + spec.alpha_jitter * rng.normal();
    } else {
      const double span = static_cast<double>(spec.phase2_boundary - spec.phase1_boundary);
      const double t = static_cast<double>(epoch - spec.phase2_boundary);
      onset = spec.phase2_onset * std::pow(spec.phase2_onset_decay, span) *
              std::pow(spec.phase3_onset_growth, t);
      alpha = std::min(spec.phase3_alpha_target, spec.phase2_alpha + spec.phase3_alpha_rate * t) +
              spec.alpha_jitter * rng.normal();
      cap_rel = std::max(spec.phase3_cap_floor,
                         spec.phase3_cap_start * std::pow(spec.phase3_cap_decay, t));
      capped = true;
    }
    for (std::size_t i = 0; i < n_bulk; ++i)
      eig.push_back(onset / 3.0 * (0.15 + 0.85 * rng.uniform01()));
    for (std::size_t i = 0; i < n_tail; ++i) {
      eig.push_back(capped ? truncated_pl_draw(rng, alpha, onset, onset * cap_rel)
                           : calibration::pl_inverse_transform(rng.uniform01(), alpha, onset));
    }
  }
  std::sort(eig.begin(), eig.end());
  return eig;
}

spectra::WeightMatrix gen_trajectory_matrix(const TrajectorySpec& spec, std::size_t epoch) {
  const auto eig = trajectory_spectrum(spec, epoch);
  const auto n = static_cast<Eigen::Index>(std::max(spec.rows, spec.cols));
  const auto m = static_cast<Eigen::Index>(std::min(spec.rows, spec.cols));

  RngStream ustream(spec.seed, epoch, 0);
  RngStream vstream(spec.seed, epoch, 1);
  const Eigen::MatrixXd u = random_orthogonal(ustream, n, m);
  const Eigen::MatrixXd v = random_orthogonal(vstream, m, m);

  Eigen::VectorXd sv(m);
  for (Eigen::Index i = 0; i < m; ++i)
    sv(i) = std::sqrt(eig[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd w = u * sv.asDiagonal() * v.transpose();
  if (spec.rows < spec.cols) w.transposeInPlace();

  std::vector<double> values(spec.rows * spec.cols);
  for (std::size_t i = 0; i < spec.rows; ++i)
    for (std::size_t j = 0; j < spec.cols; ++j)
      values[i * spec.cols + j] =
          w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return spectra::WeightMatrix(spec.rows, spec.cols, std::move(values));
}

ingest::RunManifest gen_trajectory(const TrajectorySpec& spec,
                                   const std::filesystem::path& out_dir) {
  validate_spec(spec);
  std::filesystem::create_directories(out_dir);

  ingest::RunManifest manifest;
  manifest.model_label = "synthetic-three-phase";
  manifest.matrix_id = "en.0.s.a.v";
  manifest.c_constant = 2.0;
  manifest.min_tail = std::max<std::size_t>(2, std::min(spec.rows, spec.cols) / 2);

  for (std::size_t e = 1; e <= spec.epochs; ++e) {
    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03zu.npy", e);
    const auto matrix = gen_trajectory_matrix(spec, e);
    ingest::write_matrix(matrix, out_dir / name, /*as_float32=*/true);
    manifest.entries.push_back({e, name, ingest::EntryKind::matrix});
  }
  ingest::write_manifest(manifest, out_dir / "manifest.json");
  for (auto& entry : manifest.entries) entry.path = out_dir / entry.path;
  return manifest;
}

}  // namespace htsentinel::synth
