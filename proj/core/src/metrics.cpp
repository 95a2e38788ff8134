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

#include "dip/metrics.hpp"

#include <cmath>
#include <ctime>
#include <limits>
#include <stdexcept>

namespace dip {

double psnr(const Tensor& reference, const Tensor& image) {
  if (!reference.same_shape(image))
    throw std::invalid_argument("psnr: shape mismatch");
  double mse = 0.0;
  for (int i = 0; i < reference.size(); ++i) {
    const double d = reference.v[i] - image.v[i];
    mse += d * d;
  }
  mse /= reference.size();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(reference.max() / std::sqrt(mse));
}

Tensor ema_smooth(const Tensor& prev, const Tensor& current) {
  if (!prev.same_shape(current))
    throw std::invalid_argument("ema_smooth: shape mismatch");
  Tensor out(prev.h, prev.w, prev.c);
  for (int i = 0; i < out.size(); ++i)
    out.v[i] = 0.9 * prev.v[i] + 0.1 * current.v[i];
  return out;
}

double process_cpu_seconds() {
  timespec ts;
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + ts.tv_nsec * 1e-9;
}

}  // namespace dip
