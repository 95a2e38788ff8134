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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dip/solvers.hpp"
#include "dip/spectral.hpp"

namespace dip {

/// Spectrum file: magic "DIPSPEC1", little-endian u32 n, u32 k, k f64
/// eigenvalues, then k*n f64 vectors row-major. A "<path>.meta" sidecar
/// records the generator fingerprint and the convergence flag.
void write_spectrum(const std::string& path, const SpectralBasis& basis);
SpectralBasis read_spectrum(const std::string& path);

/// Newline-separated sorted component indices, decimal.
void write_mask_file(const std::string& path, const std::vector<int>& kept);
std::vector<int> read_mask_file(const std::string& path);

/// One value per line, full double precision.
void write_values(const std::string& path, std::span<const double> v);
std::vector<double> read_values(const std::string& path);

/// Flat UTF-8 key=value lines. Blank lines and '#' comments are skipped
/// on read; ordering is preserved.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues read_key_values(const std::string& path);
void write_key_values(const std::string& path, const KeyValues& kv);

/// curves.csv with header iter,cpu_seconds,loss,psnr,psnr_ema.
void write_curves_csv(const std::string& path, const RunTrace& trace);
RunTrace read_curves_csv(const std::string& path);

}  // namespace dip
