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
#include <span>
#include <string>
#include <vector>

#include "dip/generator.hpp"
#include "dip/tensor.hpp"

namespace dip {

/// Matrix-free symmetric linear operator on R^n.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  virtual int dim() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

/// J J^T of the generator Jacobian at fixed weights (one jvp(vjp(.))
/// composition per apply). The weights are frozen at construction; the
/// analysis treats the Jacobian at initialization as constant.
class JjtOperator final : public SymmetricOperator {
 public:
  JjtOperator(const Generator& g, std::vector<double> theta);

  int dim() const override { return gen_->out_size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

  const Generator& generator() const { return *gen_; }
  std::span<const double> theta() const { return theta_; }

 private:
  const Generator* gen_;
  std::vector<double> theta_;
  Generator::Tape tape_;  // primal pass at theta, shared by every apply
};

/// Convenience wrapper: J J^T v at the given weights.
std::vector<double> jjt_apply(const Generator& g, std::span<const double> theta,
                              std::span<const double> v);

/// Top-k eigenpairs of a symmetric PSD operator: eigenvalues descending,
/// vectors orthonormal, rows of `vectors` of length n.
struct SpectralBasis {
  int n = 0;
  std::vector<double> eigenvalues;
  std::vector<double> vectors;  // k x n, row-major
  std::string fingerprint;      // generator config hash + seed, may be empty
  bool converged = true;

  int k() const { return static_cast<int>(eigenvalues.size()); }
  std::span<const double> vector(int i) const {
    return {vectors.data() + static_cast<std::size_t>(i) * n,
            static_cast<std::size_t>(n)};
  }
};

/// Lanczos with full reorthogonalization. Ritz pairs are accepted once
/// every requested residual satisfies ||A v - lambda v|| <= 1e-8 * lambda_max;
/// gives up after 10*k iterations and returns the partial result with
/// `converged = false`.
SpectralBasis lanczos_topk(const SymmetricOperator& op, int k,
                           std::uint64_t seed);

/// Coefficients <u_i, v> for i = 0..k-1.
std::vector<double> project(const SpectralBasis& basis,
                            std::span<const double> v);

/// Linearized gradient-descent residual after t steps of step size eta:
/// components inside the basis decay as (1 - eta*sigma_i^2)^t, the
/// remainder of r0 outside the computed basis is carried unattenuated.
std::vector<double> predict_residual(const SpectralBasis& basis,
                                     std::span<const double> r0, double eta,
                                     int t);

/// The three right-hand terms of the linearized generalization bound and
/// the measured left-hand side after t linearized steps.
struct BoundTerms {
  double init_term;    // (1 - eta*sigma_min^2)^t * ||G(theta0)||
  double signal_term;  // (1 - eta*sigma_p^2)^t * ||x_true||
  double noise_term;   // sqrt(sum_i [1-(1-eta*sigma_i^2)^t]^2 <u_i, noise>^2)
  double lhs;          // ||G_lin(theta_t) - x_true||
};

/// Requires the full spectrum (basis.k() == n); throws otherwise since the
/// bound needs sigma_min. p indexes the leading eigenvalue block (1-based).
BoundTerms bound_terms(const SpectralBasis& full_basis, const Generator& g,
                       std::span<const double> x_true,
                       std::span<const double> noise, double eta, int t, int p);

}  // namespace dip
