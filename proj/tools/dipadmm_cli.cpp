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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "dip/experiment.hpp"
#include "dip/image_io.hpp"
#include "dip/metrics.hpp"
#include "dip/rng.hpp"
#include "dip/spectral.hpp"

namespace fs = std::filesystem;

namespace {

void add_config_flags(CLI::App* cmd, dip::ExperimentConfig& cfg) {
  cmd->add_option("--task", cfg.task, "denoise | inpaint");
  cmd->add_option("--method", cfg.method,
                  "dip | dip-admm-v1 | dip-admm-v2 | pnp | ista | fista | "
                  "directional");
  cmd->add_option("--input", cfg.input, "ground-truth PNG");
  cmd->add_option("--out", cfg.output_dir, "run directory");
  cmd->add_option("--keep-fraction", cfg.keep_fraction,
                  "kept pixel fraction for inpainting");
  cmd->add_option("--noise-sigma", cfg.noise_sigma,
                  "noise standard deviation, 0..255 scale");
  cmd->add_option("--prior", cfg.prior,
                  "none | l1:LAM | tv:LAM | nlm:SIGMA,PDIST,CUTOFF | "
                  "external:CMD");
  cmd->add_option("--levels", cfg.level_channels,
                  "comma-separated channels per scale");
  cmd->add_option("--kernel-size", cfg.kernel_size, "conv kernel size (odd)");
  cmd->add_option("--input-channels", cfg.input_channels, "latent channels");
  cmd->add_option("--iters", cfg.iters, "iterations T");
  cmd->add_option("--inner-ista", cfg.inner_ista,
                  "x-step iterations N (dip-admm-v1)");
  cmd->add_option("--rho", cfg.rho, "ADMM penalty");
  cmd->add_option("--dual-step", cfg.dual_step, "dual ascent step");
  cmd->add_option("--lr", cfg.lr, "Adam learning rate");
  cmd->add_option("--red-lambda", cfg.red_lambda,
                  "denoiser residual weight (method=dip)");
  cmd->add_option("--optimizer", cfg.optimizer, "adam | gd");
  cmd->add_option("--record-every", cfg.record_every, "trace row cadence");
  cmd->add_option("--png-every", cfg.png_every,
                  "snapshot cadence (0: about ten per run)");
  cmd->add_option("--seed", cfg.seed, "experiment seed");
  cmd->add_option("--spectrum", cfg.spectrum,
                  "spectrum file (method=directional)");
  cmd->add_option("--top-p", cfg.top_p,
                  "leading directions to fit (method=directional)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse-problem reconstruction with untrained convolutional "
               "generators, hybrid ADMM priors and Jacobian spectral analysis"};
  app.require_subcommand(1);

  // --- degrade ---------------------------------------------------------
  std::string d_input, d_out, d_task = "inpaint";
  double d_keep = 0.5, d_sigma = 10.0;
  std::uint64_t d_seed = 0;
  auto* degrade = app.add_subcommand(
      "degrade", "Corrupt an image: mask pixels and add Gaussian noise");
  degrade->add_option("--input", d_input, "source PNG")->required();
  degrade->add_option("--out", d_out, "output directory")->required();
  degrade->add_option("--task", d_task, "denoise | inpaint");
  degrade->add_option("--keep-fraction", d_keep, "kept pixel fraction");
  degrade->add_option("--noise-sigma", d_sigma, "noise sigma, 0..255 scale");
  degrade->add_option("--seed", d_seed, "seed");

  // --- reconstruct ------------------------------------------------------
  dip::ExperimentConfig rc;
  std::string rc_config;
  auto* reconstruct =
      app.add_subcommand("reconstruct", "Run one reconstruction experiment");
  reconstruct->add_option("--config", rc_config,
                          "key=value config file (flags override)");
  add_config_flags(reconstruct, rc);

  // --- spectrum ---------------------------------------------------------
  dip::ExperimentConfig sc;
  std::string s_out, s_input;
  int s_h = 0, s_w = 0, s_c = 3, s_k = 0;  // k <= 0: min(n, 2000)
  auto* spectrum = app.add_subcommand(
      "spectrum", "Top-k eigenpairs of J J^T at generator initialization");
  spectrum->add_option("--out", s_out, "spectrum file")->required();
  spectrum->add_option("--k", s_k, "number of eigenpairs (default min(n, 2000))");
  spectrum->add_option("--input", s_input, "PNG defining the output shape");
  spectrum->add_option("--height", s_h, "output height");
  spectrum->add_option("--width", s_w, "output width");
  spectrum->add_option("--channels", s_c, "output channels (1 or 3)");
  spectrum->add_option("--levels", sc.level_channels, "channels per scale");
  spectrum->add_option("--kernel-size", sc.kernel_size, "kernel size");
  spectrum->add_option("--input-channels", sc.input_channels, "latent channels");
  spectrum->add_option("--seed", sc.seed, "experiment seed");

  // --- project ----------------------------------------------------------
  std::string p_spectrum, p_image, p_out;
  double p_noise_sigma = -1.0;
  std::uint64_t p_noise_seed = 0;
  bool p_center = false;
  auto* project = app.add_subcommand(
      "project", "Coefficients of an image or noise draw in a stored basis");
  project->add_option("--spectrum", p_spectrum, "spectrum file")->required();
  project->add_option("--out", p_out, "output CSV")->required();
  project->add_option("--image", p_image, "PNG to project");
  project->add_option("--noise-sigma", p_noise_sigma,
                      "project a Gaussian draw of this sigma (0..255 scale)");
  project->add_option("--noise-seed", p_noise_seed, "seed for the noise draw");
  project->add_flag("--center", p_center, "subtract the mean before projecting");

  // --- predict ----------------------------------------------------------
  std::string pr_spectrum, pr_init, pr_target, pr_out;
  double pr_eta = 0.0;
  int pr_steps = 0;
  auto* predict = app.add_subcommand(
      "predict", "Linearized residual prediction after t gradient steps");
  predict->add_option("--spectrum", pr_spectrum, "spectrum file")->required();
  predict->add_option("--init", pr_init, "PNG of the initial reconstruction")
      ->required();
  predict->add_option("--target", pr_target, "PNG of the fitting target")
      ->required();
  predict->add_option("--eta", pr_eta, "gradient step size")->required();
  predict->add_option("--steps", pr_steps, "number of steps t")->required();
  predict->add_option("--out", pr_out, "predicted reconstruction PNG")
      ->required();

  // --- psnr -------------------------------------------------------------
  std::string q_ref, q_img;
  auto* psnr_cmd = app.add_subcommand("psnr", "PSNR of an image vs a reference");
  psnr_cmd->add_option("--reference", q_ref, "reference PNG")->required();
  psnr_cmd->add_option("--image", q_img, "image PNG")->required();

  // --- aggregate ---------------------------------------------------------
  std::vector<std::string> a_dirs;
  std::string a_out;
  auto* aggregate = app.add_subcommand(
      "aggregate", "Mean/std of curves.csv across run directories");
  aggregate->add_option("--out", a_out, "output CSV")->required();
  aggregate->add_option("dirs", a_dirs, "run directories")->required();

  // --- synth -------------------------------------------------------------
  std::string y_out;
  int y_h = 128, y_w = 128, y_c = 3;
  auto* synth = app.add_subcommand(
      "synth", "Write a deterministic synthetic test image");
  synth->add_option("--out", y_out, "output PNG")->required();
  synth->add_option("--height", y_h, "height");
  synth->add_option("--width", y_w, "width");
  synth->add_option("--channels", y_c, "channels (1 or 3)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*degrade) {
      dip::ExperimentConfig cfg;
      cfg.task = d_task;
      cfg.method = "pnp";  // any non-generator method: no cropping
      cfg.input = d_input;
      cfg.keep_fraction = d_keep;
      cfg.noise_sigma = d_sigma;
      cfg.seed = d_seed;
      dip::Degradation deg = dip::make_degradation(cfg);
      fs::create_directories(d_out);
      dip::write_png((fs::path(d_out) / "truth.png").string(), deg.truth);
      dip::write_png((fs::path(d_out) / "degraded.png").string(),
                     deg.zero_filled);
      if (deg.meas.op.kind() == dip::MeasurementOp::Kind::mask)
        dip::write_mask_file((fs::path(d_out) / "mask.txt").string(),
                             deg.meas.op.kept_indices());
      dip::write_values((fs::path(d_out) / "measurement.txt").string(),
                        deg.meas.b);
      std::cout << d_out << "\n";
    } else if (*reconstruct) {
      dip::ExperimentConfig cfg;
      if (!rc_config.empty())
        cfg = dip::config_from_key_values(dip::read_key_values(rc_config));
      // flags explicitly given on the command line override file values
      auto pick = [&](const char* flag, auto& dst, const auto& parsed) {
        if (reconstruct->count(flag) > 0) dst = parsed;
      };
      pick("--task", cfg.task, rc.task);
      pick("--method", cfg.method, rc.method);
      pick("--input", cfg.input, rc.input);
      pick("--out", cfg.output_dir, rc.output_dir);
      pick("--keep-fraction", cfg.keep_fraction, rc.keep_fraction);
      pick("--noise-sigma", cfg.noise_sigma, rc.noise_sigma);
      pick("--prior", cfg.prior, rc.prior);
      pick("--levels", cfg.level_channels, rc.level_channels);
      pick("--kernel-size", cfg.kernel_size, rc.kernel_size);
      pick("--input-channels", cfg.input_channels, rc.input_channels);
      pick("--iters", cfg.iters, rc.iters);
      pick("--inner-ista", cfg.inner_ista, rc.inner_ista);
      pick("--rho", cfg.rho, rc.rho);
      pick("--dual-step", cfg.dual_step, rc.dual_step);
      pick("--lr", cfg.lr, rc.lr);
      pick("--red-lambda", cfg.red_lambda, rc.red_lambda);
      pick("--optimizer", cfg.optimizer, rc.optimizer);
      pick("--record-every", cfg.record_every, rc.record_every);
      pick("--png-every", cfg.png_every, rc.png_every);
      pick("--seed", cfg.seed, rc.seed);
      pick("--spectrum", cfg.spectrum, rc.spectrum);
      pick("--top-p", cfg.top_p, rc.top_p);
      std::cout << dip::run_experiment(cfg) << "\n";
    } else if (*spectrum) {
      if (!s_input.empty()) {
        const dip::Tensor img = dip::read_png(s_input);
        // same center-crop rule as reconstruct, so the basis matches the
        // image the generator methods will actually see
        const int factor =
            1 << dip::parse_level_channels(sc.level_channels).size();
        s_h = img.h - img.h % factor;
        s_w = img.w - img.w % factor;
        s_c = img.c;
      }
      if (s_h <= 0 || s_w <= 0)
        throw std::invalid_argument("spectrum: give --input or --height/--width");
      if (s_k <= 0) s_k = std::min(s_h * s_w * s_c, 2000);
      const dip::SpectralBasis basis =
          dip::compute_spectrum_file(sc, s_h, s_w, s_c, s_k, s_out);
      if (!basis.converged)
        std::cerr << "warning: Lanczos did not fully converge; partial "
                     "results written\n";
      std::cout << s_out << "\n";
    } else if (*project) {
      const dip::SpectralBasis basis = dip::read_spectrum(p_spectrum);
      std::vector<double> v;
      if (!p_image.empty()) {
        const dip::Tensor img = dip::read_png(p_image);
        v = img.v;
      } else if (p_noise_sigma >= 0) {
        v.resize(basis.n);
        dip::Rng rng(p_noise_seed);
        for (double& x : v) x = (p_noise_sigma / 255.0) * rng.gaussian();
      } else {
        throw std::invalid_argument("project: give --image or --noise-sigma");
      }
      dip::project_file(p_spectrum, v, p_center, "", p_out);
      std::cout << p_out << "\n";
    } else if (*predict) {
      const dip::SpectralBasis basis = dip::read_spectrum(pr_spectrum);
      const dip::Tensor init = dip::read_png(pr_init);
      const dip::Tensor target = dip::read_png(pr_target);
      if (!init.same_shape(target) || init.size() != basis.n)
        throw std::invalid_argument("predict: shape mismatch with the basis");
      if (!basis.eigenvalues.empty() && basis.eigenvalues.front() > 0 &&
          pr_eta > 1.0 / basis.eigenvalues.front())
        std::cerr << "warning: eta exceeds 1/sigma_max^2; the linearized "
                     "recursion diverges\n";
      std::vector<double> r0(basis.n);
      for (int i = 0; i < basis.n; ++i) r0[i] = init.v[i] - target.v[i];
      const std::vector<double> rt =
          dip::predict_residual(basis, r0, pr_eta, pr_steps);
      dip::Tensor pred = target;
      for (int i = 0; i < basis.n; ++i) pred.v[i] += rt[i];
      dip::write_png(pr_out, pred);
      std::printf("residual_norm_ratio=%.17g\n",
                  dip::norm2(rt) / std::max(dip::norm2(r0), 1e-300));
    } else if (*psnr_cmd) {
      const dip::Tensor ref = dip::read_png(q_ref);
      const dip::Tensor img = dip::read_png(q_img);
      std::printf("%.6f\n", dip::psnr(ref, img));
    } else if (*aggregate) {
      dip::aggregate_runs(a_dirs, a_out);
      std::cout << a_out << "\n";
    } else if (*synth) {
      dip::write_png(y_out, dip::synthetic_test_image(y_h, y_w, y_c));
      std::cout << y_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
