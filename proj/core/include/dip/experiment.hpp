// Copyright (c) 2026 the dipadmm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dip/formats.hpp"
#include "dip/generator.hpp"
#include "dip/measurement.hpp"
#include "dip/priors.hpp"
#include "dip/solvers.hpp"
#include "dip/tensor.hpp"

namespace dip {

/// One reconstruction run, exactly as written to / read from a config file.
/// noise_sigma is in 0..255 units (the conventional image scale) and is
/// divided by 255 internally.
struct ExperimentConfig {
  std::string task = "denoise";  // denoise | inpaint
  std::string method = "dip";    // dip | dip-admm-v1 | dip-admm-v2 | pnp |
                                 // ista | fista | directional
  std::string input;             // ground-truth PNG
  std::string output_dir;
  double keep_fraction = 0.5;
  double noise_sigma = 10.0;
  std::string prior = "none";  // none | l1:L | tv:L | nlm:S,P,C | external:CMD

  std::string level_channels = "16,32,64,128,128";
  int kernel_size = 3;
  int input_channels = 32;

  int iters = 3000;
  int inner_ista = 5;
  double rho = 1.0;
  double dual_step = 1.0;
  double lr = 0.001;
  double red_lambda = 0.0;
  std::string optimizer = "adam";  // adam | gd
  int record_every = 10;
  int png_every = 0;  // 0: about ten snapshots per run

  std::uint64_t seed = 0;
  std::string spectrum;  // spectrum file, for method=directional
  int top_p = 0;         // leading directions to fit, for method=directional
};

ExperimentConfig config_from_key_values(const KeyValues& kv);
KeyValues config_to_key_values(const ExperimentConfig& cfg);

/// Rejects inconsistent task/method/prior combinations.
void validate_config(const ExperimentConfig& cfg);

Prox parse_prior(const std::string& spec);
std::vector<int> parse_level_channels(const std::string& spec);

GeneratorConfig generator_config_of(const ExperimentConfig& cfg);
SolverConfig solver_config_of(const ExperimentConfig& cfg);

/// Sub-seeds derived from the experiment seed, in a fixed order.
struct SeedBundle {
  std::uint64_t mask;
  std::uint64_t noise;
  std::uint64_t generator;
  std::uint64_t lanczos;
};
SeedBundle derive_seeds(std::uint64_t seed);

/// Ground truth (cropped when a generator is involved), operator and
/// measurement for one config.
struct Degradation {
  Tensor truth;
  Measurement meas;
  Tensor zero_filled;
};
Degradation make_degradation(const ExperimentConfig& cfg);

/// Runs the configured method and writes the run directory: config snapshot,
/// mask/measurement files, curves.csv, periodic and final PNGs. Returns the
/// output directory path.
std::string run_experiment(const ExperimentConfig& cfg);

/// ista/fista with the same per-iteration bookkeeping as the other solvers.
SolveResult ista_solve(const Measurement& meas, int h, int w, int c,
                       const Prox& prior, const SolverConfig& cfg,
                       const Tensor* ground_truth = nullptr,
                       const RecordCallback& on_record = {});
SolveResult fista_solve(const Measurement& meas, int h, int w, int c,
                        const Prox& prior, const SolverConfig& cfg,
                        const Tensor* ground_truth = nullptr,
                        const RecordCallback& on_record = {});

/// Computes the top-k spectrum of J J^T for the configured generator at its
/// initialization and writes it (plus the fingerprint sidecar) to out_path.
SpectralBasis compute_spectrum_file(const ExperimentConfig& cfg, int height,
                                    int width, int channels, int k,
                                    const std::string& out_path);

/// Projects an image (or a seeded noise draw) onto a stored basis and
/// writes CSV rows index,eigenvalue,coefficient. Refuses when the stored
/// fingerprint does not match `expect_fingerprint` (pass empty to skip).
void project_file(const std::string& spectrum_path,
                  const std::vector<double>& v, bool center,
                  const std::string& expect_fingerprint,
                  const std::string& out_csv);

/// Sample mean/std aggregation of several run directories' curves.csv.
/// All runs must share the same iteration grid. Writes header
/// iter,count,loss_mean,loss_std,psnr_mean,psnr_std,psnr_ema_mean,psnr_ema_std.
void aggregate_runs(const std::vector<std::string>& run_dirs,
                    const std::string& out_csv);

/// Deterministic piecewise-smooth test scene in [0,1]; handy when no
/// photograph is at hand.
Tensor synthetic_test_image(int h, int w, int c);

}  // namespace dip
