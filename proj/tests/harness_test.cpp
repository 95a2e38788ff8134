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

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "dip/experiment.hpp"
#include "dip/formats.hpp"
#include "dip/image_io.hpp"
#include "dip/metrics.hpp"
#include "test_support.hpp"

using namespace dip;
using dip::testing::TempDir;

TEST_CASE("psnr: closed-form examples") {
  Tensor ref = Tensor::full(2, 2, 1, 0.0);
  ref(0, 0, 0) = 1.0;  // max(ref) = 1
  Tensor img = ref;
  // mse = 1 exactly
  img(0, 0, 0) = 0.0;
  img(0, 1, 0) = img(1, 0, 0) = img(1, 1, 0) = 1.0;
  CHECK(psnr(ref, img) == doctest::Approx(0.0).epsilon(1e-12));

  const Tensor ones = Tensor::full(3, 3, 1, 1.0);
  Tensor shifted = ones;
  for (double& v : shifted.v) v += 0.1;
  CHECK(psnr(ones, shifted) == doctest::Approx(20.0).epsilon(1e-12));

  CHECK(std::isinf(psnr(ones, ones)));

  const Tensor other(2, 3, 1);
  CHECK_THROWS_AS(psnr(ones, other), std::invalid_argument);
}

TEST_CASE("ema_smooth: fixed point, first step, geometric decay") {
  const Tensor x = dip::testing::random_image(3, 3, 1, 50);
  const Tensor same = ema_smooth(x, x);
  for (int i = 0; i < x.size(); ++i)
    CHECK(same.v[i] == doctest::Approx(x.v[i]).epsilon(1e-15));

  const Tensor zero(2, 2, 1);
  const Tensor one = Tensor::full(2, 2, 1, 1.0);
  const Tensor step = ema_smooth(zero, one);
  for (double v : step.v) CHECK(v == doctest::Approx(0.1).epsilon(1e-15));

  Tensor r = zero;
  for (int t = 0; t < 50; ++t) r = ema_smooth(r, one);
  const double expect = 1.0 - std::pow(0.9, 50);
  for (double v : r.v) CHECK(v == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("png roundtrip stays within the 8-bit quantization bound") {
  TempDir tmp("png");
  for (int channels : {1, 3}) {
    const Tensor img = dip::testing::random_image(9, 13, channels, 60 + channels);
    const std::string path = tmp.str("img.png");
    write_png(path, img);
    const Tensor back = read_png(path);
    REQUIRE(back.same_shape(img));
    double max_diff = 0;
    for (int i = 0; i < img.size(); ++i)
      max_diff = std::max(max_diff, std::abs(img.v[i] - back.v[i]));
    CHECK(max_diff <= 1.0 / 510.0 + 1e-12);
  }
}

TEST_CASE("spectrum file roundtrip is exact") {
  SpectralBasis basis;
  basis.n = 6;
  basis.eigenvalues = {3.0, 1.5, 0.25};
  basis.vectors = dip::testing::random_vector(18, 70);
  basis.fingerprint = "00ff00ff00ff00ff";
  basis.converged = false;

  TempDir tmp("spec");
  const std::string path = tmp.str("s.bin");
  write_spectrum(path, basis);
  const SpectralBasis back = read_spectrum(path);
  CHECK(back.n == basis.n);
  CHECK(back.eigenvalues == basis.eigenvalues);
  CHECK(back.vectors == basis.vectors);
  CHECK(back.fingerprint == basis.fingerprint);
  CHECK(back.converged == false);

  std::ofstream(tmp.str("junk.bin")) << "not a spectrum";
  CHECK_THROWS(read_spectrum(tmp.str("junk.bin")));
}

TEST_CASE("mask and value files roundtrip exactly") {
  TempDir tmp("files");
  const std::vector<int> kept = {0, 3, 4, 11, 12, 13};
  write_mask_file(tmp.str("mask.txt"), kept);
  CHECK(read_mask_file(tmp.str("mask.txt")) == kept);

  const auto vals = dip::testing::random_vector(40, 71);
  write_values(tmp.str("vals.txt"), vals);
  CHECK(read_values(tmp.str("vals.txt")) == vals);  // %.17g roundtrips
}

TEST_CASE("config files roundtrip; unknown keys are rejected") {
  ExperimentConfig cfg;
  cfg.task = "inpaint";
  cfg.method = "dip-admm-v2";
  cfg.prior = "tv:0.01";
  cfg.keep_fraction = 0.5;
  cfg.noise_sigma = 10;
  cfg.seed = 12345;
  cfg.input = "/some/image.png";
  cfg.output_dir = "/some/dir";

  TempDir tmp("config");
  write_key_values(tmp.str("c.txt"), config_to_key_values(cfg));
  const ExperimentConfig back =
      config_from_key_values(read_key_values(tmp.str("c.txt")));
  CHECK(back.task == cfg.task);
  CHECK(back.method == cfg.method);
  CHECK(back.prior == cfg.prior);
  CHECK(back.seed == cfg.seed);
  CHECK(back.keep_fraction == cfg.keep_fraction);

  std::ofstream(tmp.str("bad.txt")) << "task=denoise\nbogus_key=1\n";
  CHECK_THROWS_AS(config_from_key_values(read_key_values(tmp.str("bad.txt"))),
                  std::invalid_argument);
}

TEST_CASE("config validation catches inconsistent combinations") {
  ExperimentConfig cfg;
  cfg.input = "x.png";
  cfg.output_dir = "out";

  cfg.method = "pnp";
  cfg.prior = "none";
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);

  cfg.method = "directional";
  cfg.prior = "none";
  cfg.spectrum = "";
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);

  cfg.method = "nope";
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);

  cfg = ExperimentConfig{};
  cfg.method = "dip-admm-v2";
  cfg.red_lambda = 0.5;  // red is a dip-only knob
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);

  cfg = ExperimentConfig{};
  cfg.task = "inpaint";
  cfg.keep_fraction = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
}

TEST_CASE("prior spec strings parse into the right kinds") {
  CHECK(parse_prior("none").kind() == Prox::Kind::none);
  CHECK(parse_prior("l1:0.3").kind() == Prox::Kind::l1);
  CHECK(parse_prior("tv:0.01").lam() == 0.01);
  CHECK(parse_prior("nlm:0.01,2,0.05").kind() == Prox::Kind::nlm);
  CHECK(parse_prior("external:/bin/true").kind() == Prox::Kind::external);
  CHECK_THROWS_AS(parse_prior("wavelet:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_prior("nlm:0.01"), std::invalid_argument);
}

TEST_CASE("run_experiment is deterministic except for the time column") {
  TempDir tmp("runs");
  const Tensor scene = synthetic_test_image(16, 16, 3);
  write_png(tmp.str("scene.png"), scene);

  ExperimentConfig cfg;
  cfg.task = "inpaint";
  cfg.method = "dip-admm-v2";
  cfg.prior = "tv:0.01";
  cfg.input = tmp.str("scene.png");
  cfg.level_channels = "2,4";
  cfg.input_channels = 2;
  cfg.iters = 25;
  cfg.record_every = 5;
  cfg.seed = 99;

  cfg.output_dir = tmp.str("a");
  run_experiment(cfg);
  cfg.output_dir = tmp.str("b");
  run_experiment(cfg);

  const RunTrace ta = read_curves_csv(tmp.str("a") + "/curves.csv");
  const RunTrace tb = read_curves_csv(tmp.str("b") + "/curves.csv");
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].iter == tb[i].iter);
    CHECK(ta[i].loss == tb[i].loss);
    CHECK(ta[i].psnr == tb[i].psnr);
    CHECK(ta[i].psnr_ema == tb[i].psnr_ema);
  }

  // final PNGs identical byte-for-byte
  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  CHECK(slurp(tmp.str("a") + "/final.png") == slurp(tmp.str("b") + "/final.png"));

  // expected artifacts exist
  for (const char* name : {"config.txt", "truth.png", "degraded.png",
                           "mask.txt", "measurement.txt", "curves.csv",
                           "final.png", "final_ema.png"})
    CHECK(std::filesystem::exists(std::filesystem::path(tmp.str("a")) / name));
}

TEST_CASE("run trace iterations are strictly increasing") {
  TempDir tmp("trace");
  const Tensor scene = synthetic_test_image(16, 16, 1);
  write_png(tmp.str("scene.png"), scene);

  ExperimentConfig cfg;
  cfg.task = "denoise";
  cfg.method = "pnp";
  cfg.prior = "tv:0.01";
  cfg.noise_sigma = 25;
  cfg.input = tmp.str("scene.png");
  cfg.iters = 33;
  cfg.record_every = 7;
  cfg.output_dir = tmp.str("run");
  run_experiment(cfg);

  const RunTrace trace = read_curves_csv(tmp.str("run") + "/curves.csv");
  REQUIRE(!trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i].iter > trace[i - 1].iter);
  CHECK(trace.back().iter == 33);
}

TEST_CASE("aggregate: sample mean and std across runs") {
  TempDir tmp("agg");
  auto write_run = [&](const std::string& name, double offset) {
    std::filesystem::create_directories(tmp.str(name));
    RunTrace t;
    for (int i = 1; i <= 3; ++i) {
      TraceRow row;
      row.iter = i * 10;
      row.cpu_seconds = i;
      row.loss = offset + i;
      row.psnr = 20.0 + offset;
      row.psnr_ema = 21.0 + offset;
      t.push_back(row);
    }
    write_curves_csv(tmp.str(name) + "/curves.csv", t);
  };
  write_run("r1", 0.0);
  write_run("r2", 1.0);
  write_run("r3", 2.0);

  aggregate_runs({tmp.str("r1"), tmp.str("r2"), tmp.str("r3")},
                 tmp.str("agg.csv"));

  std::ifstream f(tmp.str("agg.csv"));
  std::string header, line1;
  std::getline(f, header);
  CHECK(header ==
        "iter,count,loss_mean,loss_std,psnr_mean,psnr_std,psnr_ema_mean,"
        "psnr_ema_std");
  std::getline(f, line1);
  // loss at iter 10: {1, 2, 3} -> mean 2, sample std 1; psnr {20,21,22}
  CHECK(line1.substr(0, 5) == "10,3,");
  CHECK(line1.find(",2,1,21,1,22,1") != std::string::npos);

  write_run("bad", 0.0);
  RunTrace shorter;
  TraceRow row{};
  row.iter = 10;
  shorter.push_back(row);
  write_curves_csv(tmp.str("bad") + "/curves.csv", shorter);
  CHECK_THROWS(aggregate_runs({tmp.str("r1"), tmp.str("bad")}, tmp.str("x.csv")));
}

TEST_CASE("projection of a rendered basis vector recovers its index") {
  TempDir tmp("proj");
  ExperimentConfig cfg;
  cfg.level_channels = "4,8";
  cfg.input_channels = 4;
  cfg.seed = 5;

  const SpectralBasis basis =
      compute_spectrum_file(cfg, 16, 16, 1, 16, tmp.str("s.bin"));
  REQUIRE(basis.k() == 16);

  // Render u_5 into [0,1], roundtrip through an 8-bit PNG, project centered.
  const auto u5 = basis.vector(5);
  double amax = 0;
  for (double v : u5) amax = std::max(amax, std::abs(v));
  Tensor img(16, 16, 1);
  for (int i = 0; i < 256; ++i) img.v[i] = 0.5 + 0.45 * u5[i] / amax;
  write_png(tmp.str("u5.png"), img);
  const Tensor back = read_png(tmp.str("u5.png"));

  project_file(tmp.str("s.bin"), back.v, /*center=*/true, basis.fingerprint,
               tmp.str("coeffs.csv"));

  std::ifstream f(tmp.str("coeffs.csv"));
  std::string line;
  std::getline(f, line);
  CHECK(line == "index,eigenvalue,coefficient");
  int arg_max = -1;
  double best = -1.0;
  while (std::getline(f, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const int idx = std::stoi(line.substr(0, c1));
    const double coeff = std::abs(std::stod(line.substr(c2 + 1)));
    if (coeff > best) {
      best = coeff;
      arg_max = idx;
    }
  }
  CHECK(arg_max == 5);

  CHECK_THROWS(project_file(tmp.str("s.bin"), back.v, true,
                            "feedfeedfeedfeed", tmp.str("c2.csv")));
}

TEST_CASE("synthetic test image is deterministic and in range") {
  const Tensor a = synthetic_test_image(32, 32, 3);
  const Tensor b = synthetic_test_image(32, 32, 3);
  CHECK(a.v == b.v);
  CHECK(a.min() >= 0.0);
  CHECK(a.max() <= 1.0);
  CHECK(tv_norm(a) > 0.0);
}

#ifdef DIPADMM_CLI
TEST_CASE("cli smoke: synth, degrade, reconstruct, psnr") {
  TempDir tmp("cli");
  const std::string cli = DIPADMM_CLI;
  auto run = [&](const std::string& args) {
    return std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
  };
  CHECK(run("synth --out " + tmp.str("img.png") +
            " --height 16 --width 16 --channels 3") == 0);
  CHECK(run("degrade --input " + tmp.str("img.png") + " --out " +
            tmp.str("deg") + " --task inpaint --keep-fraction 0.5 "
            "--noise-sigma 10 --seed 3") == 0);
  CHECK(run("reconstruct --input " + tmp.str("img.png") + " --out " +
            tmp.str("run") +
            " --task inpaint --method pnp --prior tv:0.01 --iters 40 "
            "--record-every 10 --seed 3") == 0);
  CHECK(run("psnr --reference " + tmp.str("img.png") + " --image " +
            tmp.str("run") + "/final.png") == 0);
  CHECK(run("aggregate --out " + tmp.str("agg.csv") + " " + tmp.str("run")) == 0);
  // invalid combination exits nonzero
  CHECK(run("reconstruct --input " + tmp.str("img.png") + " --out " +
            tmp.str("bad") + " --method pnp --prior none --iters 5") != 0);
}
#endif
