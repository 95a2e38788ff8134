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

#include <string>

#include "dip/tensor.hpp"

namespace dip {

/// Reads an 8- or 16-bit PNG into [0,1] doubles. Palette images expand to
/// RGB, alpha is dropped; the result has 1 or 3 channels.
Tensor read_png(const std::string& path);

/// Writes an 8-bit grayscale or RGB PNG; values are clamped to [0,1] and
/// rounded, so a write/read roundtrip moves each component by at most 1/510.
void write_png(const std::string& path, const Tensor& img);

}  // namespace dip
