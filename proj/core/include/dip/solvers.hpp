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

#include <functional>
#include <span>
#include <vector>

#include "dip/generator.hpp"
#include "dip/measurement.hpp"
#include "dip/priors.hpp"
#include "dip/spectral.hpp"
#include "dip/tensor.hpp"

namespace dip {

struct SolverConfig {
  double rho = 1.0;
  double dual_step = 1.0;
  int iters = 1;       // T
  int inner_ista = 5;  // N, x-step iterations of dip_admm_v1
  double lr = 0.001;

  enum class Optimizer { adam, gd };
  Optimizer optimizer = Optimizer::adam;

  double red_lambda = 0.0;  // weight of the denoiser residual term (dip_gd)
  int record_every = 10;
};

struct TraceRow {
  int iter;
  double cpu_seconds;
  double loss;
  double psnr;      // NaN when no ground truth was given
  double psnr_ema;  // PSNR of the EMA-smoothed iterate
};
using RunTrace = std::vector<TraceRow>;

/// Called at every recorded iteration with the raw and EMA reconstructions.
using RecordCallback =
    std::function<void(int iter, const Tensor& image, const Tensor& ema)>;

/// image/ema: final (EMA) reconstruction. theta: final weights for the
/// generator-based methods. x/u: final ADMM primal and scaled dual (the
/// primal is y for pnp_admm). prox_calls: prior evaluations in this run.
/// constraint_gap: ||x_t - G(theta_t)|| at the recorded iterations of the
/// ADMM variants.
struct SolveResult {
  Tensor image;
  Tensor ema;
  RunTrace trace;
  std::vector<double> theta;
  Tensor x;
  Tensor u;
  std::vector<double> constraint_gap;
  long prox_calls = 0;
};

/// Proximal gradient with fixed step 1/(||A^T A|| + rho); the optional
/// quadratic anchor adds (rho/2)*||x - anchor||^2 to the smooth part.
Tensor ista(std::span<const double> b, const LinearOperator& op,
            const Prox& prior, int iters, const Tensor& x0, double rho = 0.0,
            const Tensor* anchor = nullptr);

/// ista with Nesterov momentum and a monotone (function) restart, so the
/// objective trace is non-increasing.
Tensor fista(std::span<const double> b, const LinearOperator& op,
             const Prox& prior, int iters, const Tensor& x0);

/// 0.5*||A x - b||^2.
double data_objective(std::span<const double> b, const LinearOperator& op,
                      const Tensor& x);

/// Gradient (or Adam) descent on 0.5*||b - A G(theta)||^2, optionally with
/// the denoiser residual term red_lambda * 0.5 * x^T (x - f(x)).
SolveResult dip_gd(const Generator& g, const Measurement& meas,
                   const Prox& prior, const SolverConfig& cfg,
                   const Tensor* ground_truth = nullptr,
                   const RecordCallback& on_record = {});

/// ADMM on 0.5*||b - A x||^2 + R(x) s.t. x = G(theta): N inner proximal
/// gradient steps for x, one descent step for theta, dual ascent for u.
SolveResult dip_admm_v1(const Generator& g, const Measurement& meas,
                        const Prox& prior, const SolverConfig& cfg,
                        const Tensor* ground_truth = nullptr,
                        const RecordCallback& on_record = {});

/// ADMM on 0.5*||b - A G(theta)||^2 + R(x) s.t. x = G(theta): the x step
/// is a single prox call per iteration.
SolveResult dip_admm_v2(const Generator& g, const Measurement& meas,
                        const Prox& prior, const SolverConfig& cfg,
                        const Tensor* ground_truth = nullptr,
                        const RecordCallback& on_record = {});

/// Exact y step of pnp_admm for diagonal A^T A:
/// (A^T A + rho I)^{-1} (A^T b + rho (x + u)).
Tensor pnp_y_step(std::span<const double> atb,
                  std::span<const double> gram_diag, double rho,
                  const Tensor& x, const Tensor& u);

/// Plug-and-play ADMM without a network; the y step is the exact diagonal
/// solve. Requires identity or mask operators (diagonal A^T A).
SolveResult pnp_admm(const Measurement& meas, int h, int w, int c,
                     const Prox& prior, const SolverConfig& cfg,
                     const Tensor* ground_truth = nullptr,
                     const RecordCallback& on_record = {});

/// Descent on the projected loss 0.5*||Ubar^T (G(theta) - b)||^2 with Ubar
/// the first p basis vectors; denoising only (A = I).
SolveResult directional_fit(const Generator& g, const Tensor& b,
                            const SpectralBasis& basis, int p,
                            const SolverConfig& cfg,
                            const Tensor* ground_truth = nullptr,
                            const RecordCallback& on_record = {});

}  // namespace dip
