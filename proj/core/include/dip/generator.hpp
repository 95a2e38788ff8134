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

#include "dip/tensor.hpp"

namespace dip {

/// Hourglass convolutional generator configuration.
///
/// The architecture is fixed up to these knobs: one stride-2 convolution per
/// encoder level, one bilinear-2x-upsample + convolution per decoder level,
/// a 1x1 sigmoid head, leaky-ReLU activations, reflect padding, no skip
/// connections and no normalization layers.
struct GeneratorConfig {
  std::vector<int> level_channels = {16, 32, 64, 128, 128};
  int kernel_size = 3;
  int input_channels = 32;
  double leaky_slope = 0.1;
  std::uint64_t seed = 0;

  int levels() const { return static_cast<int>(level_channels.size()); }
};

/// Placement of one convolution's weights inside the flat theta vector.
/// Weights are stored [out][kh][kw][in] followed by [out] biases.
struct ConvSpec {
  int in_ch = 0;
  int out_ch = 0;
  int k = 0;
  int stride = 1;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_ch) * k * k * in_ch + out_ch;
  }
};

/// Untrained convolutional generator G(theta) with a fixed latent input z.
///
/// z is drawn once (standard normal, seeded) and never changes; the output
/// spatial size equals the latent spatial size. forward(), vjp() and jvp()
/// are pure functions of (config, seed, theta), so results are bitwise
/// reproducible.
class Generator {
 public:
  /// Intermediate values of one forward pass, reused by vjp().
  struct Tape {
    std::vector<Tensor> conv_inputs;  // input feature map of each conv
    std::vector<Tensor> preacts;      // conv output before leaky-ReLU
    Tensor output;                    // after sigmoid
  };

  Generator(GeneratorConfig config, int out_h, int out_w, int out_c);

  const GeneratorConfig& config() const { return config_; }
  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }
  int out_c() const { return out_c_; }
  int out_size() const { return out_h_ * out_w_ * out_c_; }

  std::size_t weight_count() const { return weight_count_; }
  const std::vector<double>& theta0() const { return theta0_; }
  const Tensor& z() const { return z_; }
  const std::vector<ConvSpec>& convs() const { return convs_; }

  /// Hash of (config, seed, output shape); identifies the Jacobian a
  /// serialized spectrum belongs to.
  std::string fingerprint() const;

  Tensor forward(std::span<const double> theta) const;
  Tensor forward(std::span<const double> theta, Tape& tape) const;

  /// Reverse mode: gradient of the scalar loss whose adjoint seed
  /// dL/dG is `seed`, with respect to theta.
  std::vector<double> vjp(std::span<const double> theta, const Tape& tape,
                          const Tensor& seed) const;
  std::vector<double> vjp(std::span<const double> theta,
                          const Tensor& seed) const;

  /// Forward mode: directional derivative J(theta) * dtheta.
  Tensor jvp(std::span<const double> theta,
             std::span<const double> dtheta) const;
  /// Same, reusing the primal values of a forward pass at the same theta.
  Tensor jvp(std::span<const double> theta, std::span<const double> dtheta,
             const Tape& tape) const;

 private:
  void check_theta(std::span<const double> theta) const;

  GeneratorConfig config_;
  int out_h_;
  int out_w_;
  int out_c_;
  std::size_t weight_count_ = 0;
  std::vector<ConvSpec> convs_;  // encoder convs, decoder convs, head
  Tensor z_;
  std::vector<double> theta0_;
};

/// dL/dtheta for a loss given by its adjoint seed dL/dG at G(theta).
std::vector<double> loss_grad(const Generator& g, std::span<const double> theta,
                              const Tensor& seed);

}  // namespace dip
