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
#include <optional>
#include <span>
#include <vector>

namespace dip {

/// Abstract linear map A: R^n -> R^m with adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int rows() const = 0;  // m
  virtual int cols() const = 0;  // n
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual void adjoint(std::span<const double> y, std::span<double> x) const = 0;

  /// Closed-form value of ||A^T A|| when the operator kind admits one.
  virtual std::optional<double> known_gram_norm() const { return std::nullopt; }
};

/// Identity or pixel-subset sampling operator. For masks, A selects the
/// kept components, so A A^T = I and A^T A is a 0/1 diagonal.
class MeasurementOp final : public LinearOperator {
 public:
  enum class Kind { identity, mask };

  static MeasurementOp identity(int n);
  static MeasurementOp mask(int n, std::vector<int> kept_indices);

  Kind kind() const { return kind_; }
  int rows() const override { return m_; }
  int cols() const override { return n_; }
  const std::vector<int>& kept_indices() const { return kept_; }

  void apply(std::span<const double> x, std::span<double> y) const override;
  void adjoint(std::span<const double> y, std::span<double> x) const override;
  std::optional<double> known_gram_norm() const override { return 1.0; }

  /// Diagonal of A^T A (0/1 indicator of kept components).
  std::vector<double> gram_diagonal() const;

 private:
  MeasurementOp(Kind kind, int n, int m, std::vector<int> kept)
      : kind_(kind), n_(n), m_(m), kept_(std::move(kept)) {}

  Kind kind_;
  int n_;
  int m_;
  std::vector<int> kept_;  // sorted component indices, mask only
};

/// Random pixel mask keeping round(keep_fraction * n_pixels) pixels; all
/// channels of a pixel are kept or dropped together. Component indices
/// assume row-major (h, w, c) layout.
MeasurementOp make_mask_op(int n_pixels, int channels, double keep_fraction,
                           std::uint64_t seed);

/// ||A^T A||; exact for identity/mask, power iteration otherwise
/// (tolerance 1e-9, at most 1000 iterations).
double operator_norm(const LinearOperator& op);

/// v + sigma * g with g standard normal from the seeded stream.
std::vector<double> add_gaussian_noise(std::span<const double> v, double sigma,
                                       std::uint64_t seed);

/// Measurement b = A x + noise together with its operator.
struct Measurement {
  std::vector<double> b;
  MeasurementOp op;
  double noise_sigma = 0.0;  // in canonical [0,1] intensity units
};

}  // namespace dip
