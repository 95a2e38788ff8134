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

#include "dip/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "dip/image_io.hpp"
#include "dip/metrics.hpp"
#include "dip/rng.hpp"
#include "dip/spectral.hpp"

namespace dip {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTasks = {"denoise", "inpaint"};
const std::set<std::string> kMethods = {"dip",  "dip-admm-v1", "dip-admm-v2",
                                        "pnp",  "ista",        "fista",
                                        "directional"};

bool method_uses_generator(const std::string& m) {
  return m == "dip" || m == "dip-admm-v1" || m == "dip-admm-v2" ||
         m == "directional";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("bad number for " + what + ": '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("bad integer for " + what + ": '" + s + "'");
  return v;
}

}  // namespace

std::vector<int> parse_level_channels(const std::string& spec) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = spec.find(',', pos);
    const std::string tok =
        spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty()) throw std::invalid_argument("bad level_channels: " + spec);
    out.push_back(static_cast<int>(parse_long(tok, "level_channels")));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Prox parse_prior(const std::string& spec) {
  if (spec == "none" || spec.empty()) return Prox::none();
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "l1") return Prox::l1(parse_double(args, "l1 prior"));
  if (kind == "tv") return Prox::tv(parse_double(args, "tv prior"));
  if (kind == "nlm") {
    const auto c1 = args.find(',');
    const auto c2 = args.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("nlm prior needs sigma,patch_distance,cutoff");
    return Prox::nlm(
        parse_double(args.substr(0, c1), "nlm sigma"),
        static_cast<int>(parse_long(args.substr(c1 + 1, c2 - c1 - 1),
                                    "nlm patch_distance")),
        parse_double(args.substr(c2 + 1), "nlm cutoff"));
  }
  if (kind == "external") {
    if (args.empty()) throw std::invalid_argument("external prior needs a command");
    return Prox::external(args);
  }
  throw std::invalid_argument("unknown prior: " + spec);
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "task") cfg.task = value;
    else if (key == "method") cfg.method = value;
    else if (key == "input") cfg.input = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "keep_fraction") cfg.keep_fraction = parse_double(value, key);
    else if (key == "noise_sigma") cfg.noise_sigma = parse_double(value, key);
    else if (key == "prior") cfg.prior = value;
    else if (key == "level_channels") cfg.level_channels = value;
    else if (key == "kernel_size") cfg.kernel_size = static_cast<int>(parse_long(value, key));
    else if (key == "input_channels") cfg.input_channels = static_cast<int>(parse_long(value, key));
    else if (key == "iters") cfg.iters = static_cast<int>(parse_long(value, key));
    else if (key == "inner_ista") cfg.inner_ista = static_cast<int>(parse_long(value, key));
    else if (key == "rho") cfg.rho = parse_double(value, key);
    else if (key == "dual_step") cfg.dual_step = parse_double(value, key);
    else if (key == "lr") cfg.lr = parse_double(value, key);
    else if (key == "red_lambda") cfg.red_lambda = parse_double(value, key);
    else if (key == "optimizer") cfg.optimizer = value;
    else if (key == "record_every") cfg.record_every = static_cast<int>(parse_long(value, key));
    else if (key == "png_every") cfg.png_every = static_cast<int>(parse_long(value, key));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value, key));
    else if (key == "spectrum") cfg.spectrum = value;
    else if (key == "top_p") cfg.top_p = static_cast<int>(parse_long(value, key));
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return cfg;
}

KeyValues config_to_key_values(const ExperimentConfig& cfg) {
  KeyValues kv;
  kv.emplace_back("task", cfg.task);
  kv.emplace_back("method", cfg.method);
  kv.emplace_back("input", cfg.input);
  kv.emplace_back("output_dir", cfg.output_dir);
  kv.emplace_back("keep_fraction", format_double(cfg.keep_fraction));
  kv.emplace_back("noise_sigma", format_double(cfg.noise_sigma));
  kv.emplace_back("prior", cfg.prior);
  kv.emplace_back("level_channels", cfg.level_channels);
  kv.emplace_back("kernel_size", std::to_string(cfg.kernel_size));
  kv.emplace_back("input_channels", std::to_string(cfg.input_channels));
  kv.emplace_back("iters", std::to_string(cfg.iters));
  kv.emplace_back("inner_ista", std::to_string(cfg.inner_ista));
  kv.emplace_back("rho", format_double(cfg.rho));
  kv.emplace_back("dual_step", format_double(cfg.dual_step));
  kv.emplace_back("lr", format_double(cfg.lr));
  kv.emplace_back("red_lambda", format_double(cfg.red_lambda));
  kv.emplace_back("optimizer", cfg.optimizer);
  kv.emplace_back("record_every", std::to_string(cfg.record_every));
  kv.emplace_back("png_every", std::to_string(cfg.png_every));
  kv.emplace_back("seed", std::to_string(cfg.seed));
  kv.emplace_back("spectrum", cfg.spectrum);
  kv.emplace_back("top_p", std::to_string(cfg.top_p));
  return kv;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!kTasks.count(cfg.task))
    throw std::invalid_argument("unknown task: " + cfg.task);
  if (!kMethods.count(cfg.method))
    throw std::invalid_argument("unknown method: " + cfg.method);
  if (cfg.optimizer != "adam" && cfg.optimizer != "gd")
    throw std::invalid_argument("unknown optimizer: " + cfg.optimizer);
  if (cfg.iters < 1) throw std::invalid_argument("iters must be >= 1");
  if (cfg.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (cfg.task == "inpaint" &&
      (!(cfg.keep_fraction > 0.0) || cfg.keep_fraction > 1.0))
    throw std::invalid_argument("keep_fraction must be in (0, 1]");
  if (cfg.noise_sigma < 0) throw std::invalid_argument("noise_sigma must be >= 0");

  const Prox prior = parse_prior(cfg.prior);  // validates the prior spec
  const bool needs_prox =
      cfg.method == "pnp" || cfg.method == "ista" || cfg.method == "fista";
  if (needs_prox && prior.kind() == Prox::Kind::none)
    throw std::invalid_argument(cfg.method + " requires a prior with a prox");
  if (cfg.method == "directional") {
    if (cfg.spectrum.empty())
      throw std::invalid_argument("directional requires a spectrum file");
    if (cfg.task != "denoise")
      throw std::invalid_argument("directional supports only task=denoise");
    if (cfg.top_p < 0) throw std::invalid_argument("top_p must be >= 0");
  }
  if (cfg.red_lambda < 0) throw std::invalid_argument("red_lambda must be >= 0");
  if (cfg.red_lambda > 0 && cfg.method != "dip")
    throw std::invalid_argument("red_lambda applies to method=dip only");
  if (cfg.red_lambda > 0 && prior.kind() == Prox::Kind::none)
    throw std::invalid_argument("red_lambda needs a denoiser prior");
  if (method_uses_generator(cfg.method))
    (void)parse_level_channels(cfg.level_channels);
}

GeneratorConfig generator_config_of(const ExperimentConfig& cfg) {
  GeneratorConfig g;
  g.level_channels = parse_level_channels(cfg.level_channels);
  g.kernel_size = cfg.kernel_size;
  g.input_channels = cfg.input_channels;
  g.seed = derive_seeds(cfg.seed).generator;
  return g;
}

SolverConfig solver_config_of(const ExperimentConfig& cfg) {
  SolverConfig s;
  s.rho = cfg.rho;
  s.dual_step = cfg.dual_step;
  s.iters = cfg.iters;
  s.inner_ista = cfg.inner_ista;
  s.lr = cfg.lr;
  s.optimizer = cfg.optimizer == "gd" ? SolverConfig::Optimizer::gd
                                      : SolverConfig::Optimizer::adam;
  s.red_lambda = cfg.red_lambda;
  s.record_every = cfg.record_every;
  return s;
}

SeedBundle derive_seeds(std::uint64_t seed) {
  SplitMix64 sm(seed);
  SeedBundle b;
  b.mask = sm.next();
  b.noise = sm.next();
  b.generator = sm.next();
  b.lanczos = sm.next();
  return b;
}

namespace {

Tensor crop_to_multiple(const Tensor& img, int factor) {
  const int h = img.h - img.h % factor;
  const int w = img.w - img.w % factor;
  if (h == 0 || w == 0)
    throw std::invalid_argument("image too small for the generator depth");
  if (h == img.h && w == img.w) return img;
  const int y0 = (img.h - h) / 2;
  const int x0 = (img.w - w) / 2;
  Tensor out(h, w, img.c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < img.c; ++ch)
        out(y, x, ch) = img(y0 + y, x0 + x, ch);
  return out;
}

Degradation degrade_image(const ExperimentConfig& cfg, Tensor truth) {
  const SeedBundle seeds = derive_seeds(cfg.seed);
  const int n = truth.size();
  MeasurementOp op = cfg.task == "inpaint"
                         ? make_mask_op(truth.h * truth.w, truth.c,
                                        cfg.keep_fraction, seeds.mask)
                         : MeasurementOp::identity(n);
  std::vector<double> clean(op.rows());
  op.apply(truth.v, clean);
  const double sigma = cfg.noise_sigma / 255.0;
  Degradation d{std::move(truth),
                Measurement{add_gaussian_noise(clean, sigma, seeds.noise),
                            std::move(op), sigma},
                Tensor()};
  d.zero_filled = Tensor(d.truth.h, d.truth.w, d.truth.c);
  d.meas.op.adjoint(d.meas.b, d.zero_filled.v);
  return d;
}

}  // namespace

Degradation make_degradation(const ExperimentConfig& cfg) {
  Tensor truth = read_png(cfg.input);
  if (method_uses_generator(cfg.method)) {
    const int levels =
        static_cast<int>(parse_level_channels(cfg.level_channels).size());
    truth = crop_to_multiple(truth, 1 << levels);
  }
  return degrade_image(cfg, std::move(truth));
}

namespace {

// Shared bookkeeping loop for the stateless proximal-gradient solvers.
template <typename StepFn>
SolveResult trace_prox_solver(const Measurement& meas, int h, int w, int c,
                              const Prox& prior, const SolverConfig& cfg,
                              const Tensor* gt, const RecordCallback& cb,
                              StepFn step) {
  if (meas.op.cols() != h * w * c)
    throw std::invalid_argument("prox solver: shape/operator size mismatch");
  Tensor x(h, w, c);
  meas.op.adjoint(meas.b, x.v);  // zero-fill start

  const long prox0 = prior.eval_count();
  const double t0 = process_cpu_seconds();
  SolveResult out;
  RunTrace trace;
  Tensor ema;
  // Recording mirrors the Recorder in solvers.cpp but the iteration state
  // lives in `step`.
  for (int t = 1; t <= cfg.iters; ++t) {
    x = step(std::move(x));
    if (ema.size() == 0)
      ema = x;
    else
      ema = ema_smooth(ema, x);
    const bool record = t == 1 || t == cfg.iters ||
                        (cfg.record_every > 0 && t % cfg.record_every == 0);
    if (record) {
      TraceRow row;
      row.iter = t;
      row.cpu_seconds = process_cpu_seconds() - t0;
      row.loss = data_objective(meas.b, meas.op, x) + prior.objective(x);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.psnr = gt ? psnr(*gt, x) : nan;
      row.psnr_ema = gt ? psnr(*gt, ema) : nan;
      trace.push_back(row);
      if (cb) cb(t, x, ema);
    }
  }
  out.image = x;
  out.ema = std::move(ema);
  out.trace = std::move(trace);
  out.x = std::move(x);
  out.prox_calls = prior.eval_count() - prox0;
  return out;
}

}  // namespace

SolveResult ista_solve(const Measurement& meas, int h, int w, int c,
                       const Prox& prior, const SolverConfig& cfg,
                       const Tensor* ground_truth,
                       const RecordCallback& on_record) {
  const double gram = operator_norm(meas.op);
  const double beta = 1.0 / gram;
  std::vector<double> r(meas.op.rows()), g(meas.op.cols());
  auto step = [&](Tensor x) {
    meas.op.apply(x.v, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= meas.b[i];
    meas.op.adjoint(r, g);
    for (int i = 0; i < x.size(); ++i) x.v[i] -= beta * g[i];
    return prior.apply(x, beta);
  };
  return trace_prox_solver(meas, h, w, c, prior, cfg, ground_truth, on_record,
                           step);
}

SolveResult fista_solve(const Measurement& meas, int h, int w, int c,
                        const Prox& prior, const SolverConfig& cfg,
                        const Tensor* ground_truth,
                        const RecordCallback& on_record) {
  const double gram = operator_norm(meas.op);
  const double beta = 1.0 / gram;
  std::vector<double> r(meas.op.rows()), g(meas.op.cols());

  auto objective = [&](const Tensor& t) {
    return data_objective(meas.b, meas.op, t) + prior.objective(t);
  };
  auto prox_step_from = [&](const Tensor& point) {
    meas.op.apply(point.v, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= meas.b[i];
    meas.op.adjoint(r, g);
    Tensor s = point;
    for (int i = 0; i < s.size(); ++i) s.v[i] -= beta * g[i];
    return prior.apply(s, beta);
  };

  bool first = true;
  Tensor y;
  double tk = 1.0, fx = 0.0;
  auto step = [&](Tensor x) {
    if (first) {
      y = x;
      fx = objective(x);
      first = false;
    }
    Tensor cand = prox_step_from(y);
    double fc = objective(cand);
    if (fc > fx) {
      cand = prox_step_from(x);
      fc = objective(cand);
      tk = 1.0;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = cand;
    const double mom = (tk - 1.0) / t_next;
    for (int i = 0; i < y.size(); ++i) y.v[i] += mom * (cand.v[i] - x.v[i]);
    tk = t_next;
    fx = fc;
    return cand;
  };
  return trace_prox_solver(meas, h, w, c, prior, cfg, ground_truth, on_record,
                           step);
}

namespace {

void snapshot_png(const std::string& dir, const char* stem, int iter,
                  const Tensor& img) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%06d.png", stem, iter);
  write_png((fs::path(dir) / name).string(), img);
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.output_dir.empty())
    throw std::invalid_argument("run_experiment: output_dir is required");
  if (cfg.input.empty())
    throw std::invalid_argument("run_experiment: input image is required");

  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);

  Degradation deg = make_degradation(cfg);
  const Tensor& truth = deg.truth;

  write_key_values((dir / "config.txt").string(), config_to_key_values(cfg));
  write_png((dir / "truth.png").string(), truth);
  write_png((dir / "degraded.png").string(), deg.zero_filled);
  if (deg.meas.op.kind() == MeasurementOp::Kind::mask)
    write_mask_file((dir / "mask.txt").string(), deg.meas.op.kept_indices());
  write_values((dir / "measurement.txt").string(), deg.meas.b);

  const Prox prior = parse_prior(cfg.prior);
  const SolverConfig scfg = solver_config_of(cfg);

  int png_every = cfg.png_every;
  if (png_every <= 0)
    png_every = cfg.record_every * std::max(1, cfg.iters / cfg.record_every / 10);
  RecordCallback cb = [&](int iter, const Tensor& img, const Tensor& ema) {
    if (iter % png_every != 0 && iter != cfg.iters) return;
    snapshot_png(dir.string(), "recon", iter, img);
    snapshot_png(dir.string(), "recon_ema", iter, ema);
  };

  SolveResult result;
  const std::string& m = cfg.method;
  if (m == "pnp") {
    result = pnp_admm(deg.meas, truth.h, truth.w, truth.c, prior, scfg, &truth, cb);
  } else if (m == "ista") {
    result = ista_solve(deg.meas, truth.h, truth.w, truth.c, prior, scfg, &truth, cb);
  } else if (m == "fista") {
    result = fista_solve(deg.meas, truth.h, truth.w, truth.c, prior, scfg, &truth, cb);
  } else {
    Generator gen(generator_config_of(cfg), truth.h, truth.w, truth.c);
    if (m == "dip") {
      result = dip_gd(gen, deg.meas, prior, scfg, &truth, cb);
    } else if (m == "dip-admm-v1") {
      result = dip_admm_v1(gen, deg.meas, prior, scfg, &truth, cb);
    } else if (m == "dip-admm-v2") {
      result = dip_admm_v2(gen, deg.meas, prior, scfg, &truth, cb);
    } else {  // directional
      SpectralBasis basis = read_spectrum(cfg.spectrum);
      if (!basis.fingerprint.empty() && basis.fingerprint != gen.fingerprint())
        throw std::runtime_error(
            "spectrum fingerprint does not match the configured generator");
      Tensor b(truth.h, truth.w, truth.c);
      b.v = deg.meas.b;  // denoising only: A = I
      result = directional_fit(gen, b, basis, cfg.top_p, scfg, &truth, cb);
    }
  }

  write_curves_csv((dir / "curves.csv").string(), result.trace);
  write_png((dir / "final.png").string(), result.image);
  write_png((dir / "final_ema.png").string(), result.ema);
  return cfg.output_dir;
}

SpectralBasis compute_spectrum_file(const ExperimentConfig& cfg, int height,
                                    int width, int channels, int k,
                                    const std::string& out_path) {
  const Generator gen(generator_config_of(cfg), height, width, channels);
  const JjtOperator op(gen, gen.theta0());
  SpectralBasis basis = lanczos_topk(op, k, derive_seeds(cfg.seed).lanczos);
  basis.fingerprint = gen.fingerprint();
  write_spectrum(out_path, basis);
  return basis;
}

void project_file(const std::string& spectrum_path,
                  const std::vector<double>& v, bool center,
                  const std::string& expect_fingerprint,
                  const std::string& out_csv) {
  const SpectralBasis basis = read_spectrum(spectrum_path);
  if (!expect_fingerprint.empty() && !basis.fingerprint.empty() &&
      basis.fingerprint != expect_fingerprint)
    throw std::runtime_error("spectrum fingerprint mismatch");
  if (static_cast<int>(v.size()) != basis.n)
    throw std::invalid_argument("project: vector length does not match basis");

  std::vector<double> w = v;
  if (center) {
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= static_cast<double>(w.size());
    for (double& x : w) x -= mean;
  }
  const std::vector<double> coeffs = project(basis, w);

  std::ofstream f(out_csv);
  if (!f) throw std::runtime_error("cannot create " + out_csv);
  f << "index,eigenvalue,coefficient\n";
  for (int i = 0; i < basis.k(); ++i)
    f << i << ',' << format_double(basis.eigenvalues[i]) << ','
      << format_double(coeffs[i]) << '\n';
}

void aggregate_runs(const std::vector<std::string>& run_dirs,
                    const std::string& out_csv) {
  if (run_dirs.empty())
    throw std::invalid_argument("aggregate: need at least one run directory");
  std::vector<RunTrace> traces;
  for (const auto& d : run_dirs)
    traces.push_back(read_curves_csv((fs::path(d) / "curves.csv").string()));
  const std::size_t rows = traces.front().size();
  for (const auto& t : traces) {
    if (t.size() != rows)
      throw std::runtime_error("aggregate: runs have different trace lengths");
    for (std::size_t i = 0; i < rows; ++i)
      if (t[i].iter != traces.front()[i].iter)
        throw std::runtime_error("aggregate: runs have different iteration grids");
  }

  const auto n = static_cast<double>(traces.size());
  auto mean_std = [&](auto getter, std::size_t row, double& mean, double& std) {
    mean = 0.0;
    for (const auto& t : traces) mean += getter(t[row]);
    mean /= n;
    double ss = 0.0;
    for (const auto& t : traces) {
      const double d = getter(t[row]) - mean;
      ss += d * d;
    }
    std = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;  // sample std
  };

  std::ofstream f(out_csv);
  if (!f) throw std::runtime_error("cannot create " + out_csv);
  f << "iter,count,loss_mean,loss_std,psnr_mean,psnr_std,psnr_ema_mean,psnr_ema_std\n";
  for (std::size_t i = 0; i < rows; ++i) {
    double lm, ls, pm, ps, em, es;
    mean_std([](const TraceRow& r) { return r.loss; }, i, lm, ls);
    mean_std([](const TraceRow& r) { return r.psnr; }, i, pm, ps);
    mean_std([](const TraceRow& r) { return r.psnr_ema; }, i, em, es);
    f << traces.front()[i].iter << ',' << traces.size() << ','
      << format_double(lm) << ',' << format_double(ls) << ','
      << format_double(pm) << ',' << format_double(ps) << ','
      << format_double(em) << ',' << format_double(es) << '\n';
  }
}

namespace {

double smoothstep(double edge0, double edge1, double x) {
  double t = (x - edge0) / (edge1 - edge0);
  t = t < 0 ? 0 : (t > 1 ? 1 : t);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

Tensor synthetic_test_image(int h, int w, int c) {
  if (h < 2 || w < 2 || (c != 1 && c != 3))
    throw std::invalid_argument("synthetic_test_image: bad shape");
  Tensor img(h, w, c);
  const double cy = 0.38 * h, cx = 0.44 * w;
  const double radius = 0.22 * std::min(h, w);
  const double tint[3] = {1.0, 0.88, 0.74};
  const double lift[3] = {0.0, 0.02, 0.05};
  for (int y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / (h - 1);
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / (w - 1);
      double v = 0.42 + 0.20 * std::sin(6.283185307179586 * (0.8 * fx + 0.13)) *
                            std::cos(6.283185307179586 * (0.55 * fy + 0.07)) +
                 0.10 * (fx - fy);
      const double dist = std::hypot(y - cy, x - cx);
      v += 0.30 * (1.0 - smoothstep(radius - 1.5, radius + 1.5, dist));
      // dark rectangle, soft 1px edges
      const double rx = smoothstep(0.55 * w - 1.0, 0.55 * w + 1.0, x) *
                        (1.0 - smoothstep(0.85 * w - 1.0, 0.85 * w + 1.0, x));
      const double ry = smoothstep(0.62 * h - 1.0, 0.62 * h + 1.0, y) *
                        (1.0 - smoothstep(0.88 * h - 1.0, 0.88 * h + 1.0, y));
      v -= 0.26 * rx * ry;
      for (int ch = 0; ch < c; ++ch) {
        double t = v * tint[ch] + lift[ch];
        img(y, x, ch) = t < 0.02 ? 0.02 : (t > 0.98 ? 0.98 : t);
      }
    }
  }
  return img;
}

}  // namespace dip
