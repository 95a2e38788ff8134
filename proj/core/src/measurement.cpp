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

#include "dip/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dip/rng.hpp"
#include "dip/tensor.hpp"

namespace dip {

MeasurementOp MeasurementOp::identity(int n) {
  if (n <= 0) throw std::invalid_argument("identity op: n must be positive");
  return MeasurementOp(Kind::identity, n, n, {});
}

MeasurementOp MeasurementOp::mask(int n, std::vector<int> kept_indices) {
  if (n <= 0) throw std::invalid_argument("mask op: n must be positive");
  std::sort(kept_indices.begin(), kept_indices.end());
  if (!kept_indices.empty()) {
    if (kept_indices.front() < 0 || kept_indices.back() >= n)
      throw std::invalid_argument("mask op: index out of range");
    if (std::adjacent_find(kept_indices.begin(), kept_indices.end()) !=
        kept_indices.end())
      throw std::invalid_argument("mask op: duplicate index");
  }
  const int m = static_cast<int>(kept_indices.size());
  return MeasurementOp(Kind::mask, n, m, std::move(kept_indices));
}

void MeasurementOp::apply(std::span<const double> x,
                          std::span<double> y) const {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != m_)
    throw std::invalid_argument("measurement apply: length mismatch");
  if (kind_ == Kind::identity) {
    std::copy(x.begin(), x.end(), y.begin());
    return;
  }
  for (int j = 0; j < m_; ++j) y[j] = x[kept_[j]];
}

void MeasurementOp::adjoint(std::span<const double> y,
                            std::span<double> x) const {
  if (static_cast<int>(y.size()) != m_ || static_cast<int>(x.size()) != n_)
    throw std::invalid_argument("measurement adjoint: length mismatch");
  if (kind_ == Kind::identity) {
    std::copy(y.begin(), y.end(), x.begin());
    return;
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (int j = 0; j < m_; ++j) x[kept_[j]] = y[j];
}

std::vector<double> MeasurementOp::gram_diagonal() const {
  std::vector<double> d(n_, kind_ == Kind::identity ? 1.0 : 0.0);
  if (kind_ == Kind::mask)
    for (int j : kept_) d[j] = 1.0;
  return d;
}

MeasurementOp make_mask_op(int n_pixels, int channels, double keep_fraction,
                           std::uint64_t seed) {
  if (n_pixels <= 0 || channels <= 0)
    throw std::invalid_argument("make_mask_op: bad dimensions");
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
    throw std::invalid_argument("make_mask_op: keep_fraction must be in (0, 1]");

  const int keep = static_cast<int>(std::lround(keep_fraction * n_pixels));
  std::vector<int> pixels(n_pixels);
  std::iota(pixels.begin(), pixels.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first `keep` entries are a uniform sample.
  for (int i = 0; i < keep; ++i) {
    const int j = i + static_cast<int>(rng.below(n_pixels - i));
    std::swap(pixels[i], pixels[j]);
  }
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(keep) * channels);
  for (int i = 0; i < keep; ++i)
    for (int ch = 0; ch < channels; ++ch) kept.push_back(pixels[i] * channels + ch);
  return MeasurementOp::mask(n_pixels * channels, std::move(kept));
}

double operator_norm(const LinearOperator& op) {
  if (auto known = op.known_gram_norm()) return *known;

  // Power iteration on A^T A.
  const int n = op.cols();
  const int m = op.rows();
  std::vector<double> v(n), av(m), atav(n);
  Rng rng(0x5eedULL);
  rng.fill_gaussian(v);
  double nv = norm2(v);
  if (nv == 0.0) return 0.0;
  scale(v, 1.0 / nv);
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    op.apply(v, av);
    op.adjoint(av, atav);
    const double next = dot(v, atav);
    const double na = norm2(atav);
    if (na == 0.0) return 0.0;
    for (int i = 0; i < n; ++i) v[i] = atav[i] / na;
    if (std::abs(next - lambda) <= 1e-9 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

std::vector<double> add_gaussian_noise(std::span<const double> v, double sigma,
                                       std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("add_gaussian_noise: sigma < 0");
  std::vector<double> out(v.begin(), v.end());
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (double& x : out) x += sigma * rng.gaussian();
  return out;
}

}  // namespace dip
