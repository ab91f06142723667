#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "htsentinel/ingest.hpp"
#include "htsentinel/spectra.hpp"

namespace htsentinel::synth {

enum class DistKind { power_law, exponential, log_normal };

struct DistParams {
  double alpha = 2.5;   // power law exponent
  double x_min = 1.0;   // power law lower bound
  double lambda = 1.0;  // exponential rate
  double mu = 0.0;      // log-normal location
  double sigma = 1.0;   // log-normal scale
};

// Deterministic seeded draws; power_law uses the calibration sampler on the
// rng substream (seed, 0, 0), bit for bit.
std::vector<double> gen_distribution(DistKind kind, const DistParams& params, std::size_t n,
                                     std::uint64_t seed);

// i.i.d. normal(0, sigma^2) entries, filled row-major from substream (seed, 0, 0).
spectra::WeightMatrix gen_gaussian_matrix(std::size_t n, std::size_t m, double sigma,
                                          std::uint64_t seed);

// W = G * diag(s): Gaussian columns scaled by i.i.d. power-law draws
// (alpha = tail_alpha, x_min = 1), producing a heavy-tailed ESD.
spectra::WeightMatrix gen_heavytail_matrix(std::size_t n, std::size_t m, double tail_alpha,
                                           std::uint64_t seed);

// Three-phase synthetic run. Each epoch's spectrum is prescribed and then
// realized as a dense matrix with random orthogonal factors, so the ESD of
// the emitted matrix equals the planted spectrum:
//
//   Phase I   (1..b1)    volatile scale, log-normal tail: fitted alpha high
//                        (~7-14) and jumpy, fitted x_min elevated and volatile.
//   Phase II  (b1..b2)   exact power-law tail at the schedule alpha (~2.5);
//                        the tail onset glides down to a low plateau (~0.1).
//   Phase III (b2..end)  onset grows ~6% per epoch (the fitted x_min drifts
//                        right) while the tail is truncated at a cap whose
//                        relative extent contracts, attenuating the heavy
//                        tail and pushing the fitted alpha back up (~3.1+).
struct TrajectorySpec {
  std::size_t epochs = 205;
  std::size_t phase1_boundary = 25;   // last epoch of phase I
  std::size_t phase2_boundary = 150;  // last epoch of phase II
  std::size_t rows = 300;
  std::size_t cols = 300;
  std::uint64_t seed = 1;

  double phase1_scale = 0.3;
  double phase1_scale_log_jitter = 0.7;
  double phase1_sigma_lo = 0.10;
  double phase1_sigma_hi = 0.20;
  double phase2_alpha = 2.5;
  double phase2_onset = 0.15;
  double phase2_onset_decay = 0.996;
  double phase3_alpha_target = 3.1;
  double phase3_alpha_rate = 0.04;
  double phase3_onset_growth = 1.06;
  double phase3_cap_start = 9.0;
  double phase3_cap_decay = 0.96;
  double phase3_cap_floor = 3.5;
  double alpha_jitter = 0.02;
};

// The planted eigenvalues for one epoch (ascending).
std::vector<double> trajectory_spectrum(const TrajectorySpec& spec, std::size_t epoch);

// Dense realization of the planted spectrum.
spectra::WeightMatrix gen_trajectory_matrix(const TrajectorySpec& spec, std::size_t epoch);

// Writes one float32 NPY matrix per epoch plus manifest.json into out_dir
// (c_constant = 2, min_tail = half the spectrum size). The returned manifest
// carries resolved paths.
ingest::RunManifest gen_trajectory(const TrajectorySpec& spec,
                                   const std::filesystem::path& out_dir);

}  // namespace htsentinel::synth
