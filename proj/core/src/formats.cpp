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

#include "dip/formats.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dip {

namespace {

constexpr char kSpectrumMagic[8] = {'D', 'I', 'P', 'S', 'P', 'E', 'C', '1'};

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot create " + path);
  return f;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_spectrum(const std::string& path, const SpectralBasis& basis) {
  auto f = open_out(path, true);
  f.write(kSpectrumMagic, sizeof(kSpectrumMagic));
  const std::uint32_t n = static_cast<std::uint32_t>(basis.n);
  const std::uint32_t k = static_cast<std::uint32_t>(basis.k());
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(&k), 4);
  f.write(reinterpret_cast<const char*>(basis.eigenvalues.data()),
          static_cast<std::streamsize>(sizeof(double) * k));
  f.write(reinterpret_cast<const char*>(basis.vectors.data()),
          static_cast<std::streamsize>(sizeof(double) * k * n));
  if (!f) throw std::runtime_error("failed to write " + path);

  KeyValues meta;
  meta.emplace_back("fingerprint", basis.fingerprint);
  meta.emplace_back("converged", basis.converged ? "1" : "0");
  write_key_values(path + ".meta", meta);
}

SpectralBasis read_spectrum(const std::string& path) {
  auto f = open_in(path, true);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kSpectrumMagic, 8) != 0)
    throw std::runtime_error(path + " is not a spectrum file");
  std::uint32_t n = 0, k = 0;
  f.read(reinterpret_cast<char*>(&n), 4);
  f.read(reinterpret_cast<char*>(&k), 4);
  if (!f || n == 0 || k == 0 || k > n)
    throw std::runtime_error(path + ": bad spectrum header");
  SpectralBasis basis;
  basis.n = static_cast<int>(n);
  basis.eigenvalues.resize(k);
  basis.vectors.resize(static_cast<std::size_t>(k) * n);
  f.read(reinterpret_cast<char*>(basis.eigenvalues.data()),
         static_cast<std::streamsize>(sizeof(double) * k));
  f.read(reinterpret_cast<char*>(basis.vectors.data()),
         static_cast<std::streamsize>(sizeof(double) * k * n));
  if (!f) throw std::runtime_error(path + ": truncated spectrum file");

  std::ifstream meta(path + ".meta");
  if (meta) {
    for (const auto& [key, value] : read_key_values(path + ".meta")) {
      if (key == "fingerprint") basis.fingerprint = value;
      if (key == "converged") basis.converged = value != "0";
    }
  }
  return basis;
}

void write_mask_file(const std::string& path, const std::vector<int>& kept) {
  auto f = open_out(path);
  for (int i : kept) f << i << '\n';
  if (!f) throw std::runtime_error("failed to write " + path);
}

std::vector<int> read_mask_file(const std::string& path) {
  auto f = open_in(path);
  std::vector<int> kept;
  long long v;
  while (f >> v) kept.push_back(static_cast<int>(v));
  return kept;
}

void write_values(const std::string& path, std::span<const double> v) {
  auto f = open_out(path);
  for (double x : v) f << format_double(x) << '\n';
  if (!f) throw std::runtime_error("failed to write " + path);
}

std::vector<double> read_values(const std::string& path) {
  auto f = open_in(path);
  std::vector<double> v;
  double x;
  while (f >> x) v.push_back(x);
  return v;
}

KeyValues read_key_values(const std::string& path) {
  auto f = open_in(path);
  KeyValues kv;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": malformed line '" + line + "'");
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

void write_key_values(const std::string& path, const KeyValues& kv) {
  auto f = open_out(path);
  for (const auto& [key, value] : kv) f << key << '=' << value << '\n';
  if (!f) throw std::runtime_error("failed to write " + path);
}

void write_curves_csv(const std::string& path, const RunTrace& trace) {
  auto f = open_out(path);
  f << "iter,cpu_seconds,loss,psnr,psnr_ema\n";
  char buf[32];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof(buf), "%.6f", row.cpu_seconds);
    f << row.iter << ',' << buf << ',' << format_double(row.loss) << ','
      << format_double(row.psnr) << ',' << format_double(row.psnr_ema) << '\n';
  }
  if (!f) throw std::runtime_error("failed to write " + path);
}

RunTrace read_curves_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line != "iter,cpu_seconds,loss,psnr,psnr_ema")
    throw std::runtime_error(path + ": bad curves header");
  RunTrace trace;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    TraceRow row;
    char* p = line.data();
    char* end = nullptr;
    row.iter = static_cast<int>(std::strtol(p, &end, 10));
    auto next_field = [&](double& out) {
      if (*end != ',') throw std::runtime_error(path + ": malformed row");
      p = end + 1;
      out = std::strtod(p, &end);
    };
    next_field(row.cpu_seconds);
    next_field(row.loss);
    next_field(row.psnr);
    next_field(row.psnr_ema);
    trace.push_back(row);
  }
  return trace;
}

}  // namespace dip
