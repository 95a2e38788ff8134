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

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "dip/generator.hpp"
#include "dip/rng.hpp"
#include "dip/tensor.hpp"

namespace dip::testing {

/// Tiny two-level generator used by the differentiation oracles.
inline Generator tiny_generator(int h = 8, int w = 8, int c = 1,
                                std::uint64_t seed = 7,
                                std::vector<int> channels = {4, 8},
                                int input_channels = 4) {
  GeneratorConfig cfg;
  cfg.level_channels = std::move(channels);
  cfg.input_channels = input_channels;
  cfg.seed = seed;
  return Generator(cfg, h, w, c);
}

/// Central difference of L(theta) = <seed, G(theta)> in coordinate i.
inline double fd_loss_grad_coord(const Generator& g,
                                 std::vector<double> theta, const Tensor& seed,
                                 std::size_t i, double h = 1e-4) {
  theta[i] += h;
  const double lp = dot(seed.v, g.forward(theta).v);
  theta[i] -= 2 * h;
  const double lm = dot(seed.v, g.forward(theta).v);
  return (lp - lm) / (2 * h);
}

/// Central differences are only a valid oracle where the network is smooth
/// on the whole interval: a leaky-ReLU kink between theta-h and theta+h
/// invalidates the quadrature. True when the perturbation flips no
/// activation sign.
inline bool fd_interval_smooth(const Generator& g, std::vector<double> theta,
                               std::size_t i, double h = 1e-4) {
  Generator::Tape plus, minus;
  theta[i] += h;
  g.forward(theta, plus);
  theta[i] -= 2 * h;
  g.forward(theta, minus);
  for (std::size_t l = 0; l < plus.preacts.size(); ++l)
    for (int t = 0; t < plus.preacts[l].size(); ++t)
      if ((plus.preacts[l].v[t] < 0) != (minus.preacts[l].v[t] < 0))
        return false;
  return true;
}

inline Tensor random_image(int h, int w, int c, std::uint64_t seed,
                           double lo = 0.0, double hi = 1.0) {
  Tensor t(h, w, c);
  Rng rng(seed);
  for (double& x : t.v) x = rng.uniform(lo, hi);
  return t;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  Rng rng(seed);
  for (double& x : v) x = rng.gaussian();
  return v;
}

/// Unique scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<long> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dipadmm-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(++counter));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace dip::testing
