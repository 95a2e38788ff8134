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

#include "dip/tensor.hpp"

namespace dip {

/// 20 * log10(max(reference) / sqrt(mse(reference, image))) in dB.
/// Identical images give +infinity.
double psnr(const Tensor& reference, const Tensor& image);

/// One step of the iterate smoother r <- 0.9 r + 0.1 x.
Tensor ema_smooth(const Tensor& prev, const Tensor& current);

/// Process CPU time in seconds; the learning-curve time axis.
double process_cpu_seconds();

}  // namespace dip
