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

#include <span>
#include <string>
#include <vector>

#include "dip/tensor.hpp"

namespace dip {

/// Elementwise sign(v) * max(|v| - lam, 0).
void soft_threshold(std::span<const double> v, double lam, std::span<double> out);
Tensor soft_threshold(const Tensor& v, double lam);

/// Anisotropic total variation: sum over channels of
/// sum_{i,j} |x_{i,j} - x_{i+1,j}| + |x_{i,j} - x_{i,j+1}|.
double tv_norm(const Tensor& x);

/// Exact minimizer of 0.5*||y - v||^2 + lam * sum |y_{i+1} - y_i|
/// (taut-string scan, O(n)).
void prox_tv1d(std::span<const double> v, std::span<double> out, double lam);
std::vector<double> prox_tv1d(std::span<const double> v, double lam);

/// Approximate prox of the anisotropic 2D TV norm per channel, by
/// Dykstra-corrected alternation of exact row and column 1D proxes.
/// Stops when successive sweeps differ by at most `tol` in max-norm.
Tensor prox_tv2d(const Tensor& x, double lam, int max_sweeps = 50,
                 double tol = 1e-6);

/// Non-local means with a Gaussian patch kernel. Patch radius equals
/// patch_distance; the flat search window has radius 2*patch_distance+1;
/// patches reflect at the borders. Weights are
/// exp(-max(d2 - 2*sigma^2, 0) / cutoff^2) for the kernel-weighted mean
/// squared patch distance d2 (averaged over channels).
Tensor nlm_denoise(const Tensor& x, double sigma, int patch_distance,
                   double cutoff);

/// A prior given by its proximal operator; implicit kinds (nlm, external)
/// are plain denoisers and ignore the prox scale.
class Prox {
 public:
  enum class Kind { none, l1, tv, nlm, external };

  static Prox none() { return Prox(Kind::none); }
  static Prox l1(double lam);
  static Prox tv(double lam);
  static Prox nlm(double sigma, int patch_distance, double cutoff);
  /// Runs `command <in.png> <out.png>` as the denoiser.
  static Prox external(std::string command);

  Kind kind() const { return kind_; }
  double lam() const { return lam_; }
  bool is_implicit() const {
    return kind_ == Kind::nlm || kind_ == Kind::external;
  }

  /// prox_{scale*R}(v). For implicit kinds this is the denoiser itself.
  Tensor apply(const Tensor& v, double scale = 1.0) const;

  /// R(x) for explicit kinds (lam * ||.||_1, lam * ||.||_TV), 0 otherwise.
  double objective(const Tensor& x) const;

  /// Number of apply() calls since construction or the last reset.
  long eval_count() const { return evals_; }
  void reset_eval_count() const { evals_ = 0; }

 private:
  explicit Prox(Kind kind) : kind_(kind) {}

  Kind kind_;
  double lam_ = 0.0;
  double nlm_sigma_ = 0.0;
  int nlm_patch_distance_ = 0;
  double nlm_cutoff_ = 0.0;
  std::string command_;
  mutable long evals_ = 0;
};

/// Gradient of the denoiser-induced prior 0.5 * x^T (x - f(x)) under local
/// homogeneity of f: returns x - f(x).
Tensor red_gradient(const Tensor& x, const Prox& denoiser);

}  // namespace dip
