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

#include "dip/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace dip {

bool Tensor::all_finite() const {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double Tensor::min() const {
  double m = v.empty() ? 0.0 : v[0];
  for (double x : v) m = std::min(m, x);
  return m;
}

double Tensor::max() const {
  double m = v.empty() ? 0.0 : v[0];
  for (double x : v) m = std::max(m, x);
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  // Four independent accumulators: breaks the FP dependence chain while
  // keeping a fixed summation order.
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t n = a.size(), i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
  for (double& xi : x) xi *= alpha;
}

static void check_same_shape(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("tensor shape mismatch");
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b);
  Tensor r = a;
  for (int i = 0; i < r.size(); ++i) r.v[i] += b.v[i];
  return r;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b);
  Tensor r = a;
  for (int i = 0; i < r.size(); ++i) r.v[i] -= b.v[i];
  return r;
}

Tensor operator*(double s, const Tensor& a) {
  Tensor r = a;
  for (double& x : r.v) x *= s;
  return r;
}

}  // namespace dip
