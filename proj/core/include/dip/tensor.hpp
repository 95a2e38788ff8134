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

#include <cstddef>
#include <span>
#include <vector>

namespace dip {

/// Dense H x W x C array of doubles, row-major (h, w, c).
///
/// The same type carries images (canonical pixel range [0,1]) and
/// intermediate feature maps of the generator. All arithmetic is 64-bit.
struct Tensor {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int height, int width, int channels)
      : h(height),
        w(width),
        c(channels),
        v(static_cast<std::size_t>(height) * width * channels, 0.0) {}

  static Tensor full(int height, int width, int channels, double value) {
    Tensor t(height, width, channels);
    for (double& x : t.v) x = value;
    return t;
  }

  int size() const { return h * w * c; }

  double& operator()(int y, int x, int ch) {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
  double operator()(int y, int x, int ch) const {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  bool same_shape(const Tensor& o) const {
    return h == o.h && w == o.w && c == o.c;
  }

  bool all_finite() const;
  double min() const;
  double max() const;
};

// Small flat-vector kernels shared by the solvers and the spectral code.
// Fixed evaluation order keeps results bitwise reproducible.

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

}  // namespace dip
