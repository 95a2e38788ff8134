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

#include "dip/priors.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include "dip/image_io.hpp"

namespace dip {

void soft_threshold(std::span<const double> v, double lam,
                    std::span<double> out) {
  if (lam < 0) throw std::invalid_argument("soft_threshold: lam < 0");
  if (v.size() != out.size())
    throw std::invalid_argument("soft_threshold: length mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - lam;
    out[i] = a > 0 ? (v[i] > 0 ? a : -a) : 0.0;
  }
}

Tensor soft_threshold(const Tensor& v, double lam) {
  Tensor out(v.h, v.w, v.c);
  soft_threshold(v.v, lam, out.v);
  return out;
}

double tv_norm(const Tensor& x) {
  double total = 0.0;
  for (int ch = 0; ch < x.c; ++ch) {
    for (int i = 0; i < x.h; ++i) {
      for (int j = 0; j < x.w; ++j) {
        const double p = x(i, j, ch);
        if (i + 1 < x.h) total += std::abs(p - x(i + 1, j, ch));
        if (j + 1 < x.w) total += std::abs(p - x(i, j + 1, ch));
      }
    }
  }
  return total;
}

// Taut-string scan: walks the signal once, keeping the dual slacks of the
// lower/upper tube boundaries, and emits a constant segment whenever the
// tube forces a jump.
void prox_tv1d(std::span<const double> v, std::span<double> out, double lam) {
  if (lam < 0) throw std::invalid_argument("prox_tv1d: lam < 0");
  if (v.size() != out.size())
    throw std::invalid_argument("prox_tv1d: length mismatch");
  const int n = static_cast<int>(v.size());
  if (n == 0) return;
  if (lam == 0.0) {
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }

  int k = 0;          // scan position
  int seg = 0;        // first index of the open segment
  int hit_lo = 0;     // last index where the lower slack was tight
  int hit_hi = 0;     // last index where the upper slack was tight
  double lo = v[0] - lam;  // candidate level if forced down
  double hi = v[0] + lam;  // candidate level if forced up
  double slack_lo = lam;
  double slack_hi = -lam;

  for (;;) {
    while (k == n - 1) {  // right boundary
      if (slack_lo < 0.0) {
        for (int i = seg; i <= hit_lo; ++i) out[i] = lo;
        seg = k = hit_lo = hit_lo + 1;
        lo = v[k];
        slack_lo = lam;
        slack_hi = lo + lam - hi;
      } else if (slack_hi > 0.0) {
        for (int i = seg; i <= hit_hi; ++i) out[i] = hi;
        seg = k = hit_hi = hit_hi + 1;
        hi = v[k];
        slack_hi = -lam;
        slack_lo = hi - lam - lo;
      } else {
        const double level = lo + slack_lo / (k - seg + 1);
        for (int i = seg; i <= k; ++i) out[i] = level;
        return;
      }
    }
    slack_lo += v[k + 1] - lo;
    if (slack_lo < -lam) {  // forced negative jump at hit_lo
      for (int i = seg; i <= hit_lo; ++i) out[i] = lo;
      seg = k = hit_lo = hit_hi = hit_lo + 1;
      lo = v[k];
      hi = lo + 2 * lam;
      slack_lo = lam;
      slack_hi = -lam;
      continue;
    }
    slack_hi += v[k + 1] - hi;
    if (slack_hi > lam) {  // forced positive jump at hit_hi
      for (int i = seg; i <= hit_hi; ++i) out[i] = hi;
      seg = k = hit_lo = hit_hi = hit_hi + 1;
      hi = v[k];
      lo = hi - 2 * lam;
      slack_lo = lam;
      slack_hi = -lam;
      continue;
    }
    ++k;
    if (slack_lo >= lam) {
      lo += (slack_lo - lam) / (k - seg + 1);
      slack_lo = lam;
      hit_lo = k;
    }
    if (slack_hi <= -lam) {
      hi += (slack_hi + lam) / (k - seg + 1);
      slack_hi = -lam;
      hit_hi = k;
    }
  }
}

std::vector<double> prox_tv1d(std::span<const double> v, double lam) {
  std::vector<double> out(v.size());
  prox_tv1d(v, out, lam);
  return out;
}

namespace {

// Exact 1D prox along every row (axis = 0) or column (axis = 1) of each
// channel.
Tensor prox_tv_lines(const Tensor& x, double lam, int axis) {
  Tensor out = x;
  const int len = axis == 0 ? x.w : x.h;
  std::vector<double> line(len), proxed(len);
  const int outer = axis == 0 ? x.h : x.w;
  for (int o = 0; o < outer; ++o) {
    for (int ch = 0; ch < x.c; ++ch) {
      for (int i = 0; i < len; ++i)
        line[i] = axis == 0 ? x(o, i, ch) : x(i, o, ch);
      prox_tv1d(line, proxed, lam);
      for (int i = 0; i < len; ++i) {
        if (axis == 0)
          out(o, i, ch) = proxed[i];
        else
          out(i, o, ch) = proxed[i];
      }
    }
  }
  return out;
}

}  // namespace

Tensor prox_tv2d(const Tensor& x, double lam, int max_sweeps, double tol) {
  if (lam < 0) throw std::invalid_argument("prox_tv2d: lam < 0");
  if (lam == 0.0 || x.size() == 0) return x;

  // Dykstra splitting between the row-TV and column-TV proxes.
  Tensor y = x;
  Tensor p(x.h, x.w, x.c), q(x.h, x.w, x.c);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Tensor t = y + p;
    Tensor a = prox_tv_lines(t, lam, 0);
    p = t - a;
    t = a + q;
    Tensor y_next = prox_tv_lines(t, lam, 1);
    q = t - y_next;

    double delta = 0.0;
    for (int i = 0; i < y.size(); ++i)
      delta = std::max(delta, std::abs(y_next.v[i] - y.v[i]));
    y = std::move(y_next);
    if (sweep > 0 && delta <= tol) break;
  }
  return y;
}

namespace {

inline int reflect_idx(int i, int n) {
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return i;
}

}  // namespace

Tensor nlm_denoise(const Tensor& x, double sigma, int patch_distance,
                   double cutoff) {
  if (sigma <= 0 || patch_distance < 1 || cutoff <= 0)
    throw std::invalid_argument("nlm_denoise: parameters must be positive");

  const int r = patch_distance;
  const int win = 2 * patch_distance + 1;
  const int pk = 2 * r + 1;

  // Normalized Gaussian patch kernel.
  std::vector<double> kernel(static_cast<std::size_t>(pk) * pk);
  {
    const double a = pk / 4.0;
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const double g = std::exp(-(dy * dy + dx * dx) / (2.0 * a * a));
        kernel[static_cast<std::size_t>(dy + r) * pk + (dx + r)] = g;
        sum += g;
      }
    for (double& g : kernel) g /= sum;
  }

  // Reflect-padded copy so patch taps are branch-free.
  const int ph = x.h + 2 * r, pw = x.w + 2 * r;
  Tensor pad(ph, pw, x.c);
  for (int i = 0; i < ph; ++i)
    for (int j = 0; j < pw; ++j)
      for (int ch = 0; ch < x.c; ++ch)
        pad(i, j, ch) = x(reflect_idx(i - r, x.h), reflect_idx(j - r, x.w), ch);

  const double two_sigma2 = 2.0 * sigma * sigma;
  const double inv_h2 = 1.0 / (cutoff * cutoff);
  Tensor out(x.h, x.w, x.c);
  std::vector<double> acc(x.c);

  for (int py = 0; py < x.h; ++py) {
    for (int px = 0; px < x.w; ++px) {
      std::fill(acc.begin(), acc.end(), 0.0);
      double wsum = 0.0;
      const int qy0 = std::max(0, py - win), qy1 = std::min(x.h - 1, py + win);
      const int qx0 = std::max(0, px - win), qx1 = std::min(x.w - 1, px + win);
      for (int qy = qy0; qy <= qy1; ++qy) {
        for (int qx = qx0; qx <= qx1; ++qx) {
          double d2 = 0.0;
          for (int dy = -r; dy <= r; ++dy) {
            const double* prow = &pad.v[(static_cast<std::size_t>(py + dy + r) * pw) * x.c];
            const double* qrow = &pad.v[(static_cast<std::size_t>(qy + dy + r) * pw) * x.c];
            const double* krow = &kernel[static_cast<std::size_t>(dy + r) * pk];
            for (int dx = -r; dx <= r; ++dx) {
              const double* pp = prow + static_cast<std::size_t>(px + dx + r) * x.c;
              const double* qq = qrow + static_cast<std::size_t>(qx + dx + r) * x.c;
              double s = 0.0;
              for (int ch = 0; ch < x.c; ++ch) {
                const double diff = pp[ch] - qq[ch];
                s += diff * diff;
              }
              d2 += krow[dx + r] * s;
            }
          }
          d2 /= x.c;
          const double arg = d2 - two_sigma2;
          const double wgt = std::exp(-(arg > 0 ? arg : 0.0) * inv_h2);
          wsum += wgt;
          const double* qpx = &x.v[(static_cast<std::size_t>(qy) * x.w + qx) * x.c];
          for (int ch = 0; ch < x.c; ++ch) acc[ch] += wgt * qpx[ch];
        }
      }
      double* opx = &out.v[(static_cast<std::size_t>(py) * x.w + px) * x.c];
      for (int ch = 0; ch < x.c; ++ch) opx[ch] = acc[ch] / wsum;
    }
  }
  return out;
}

Prox Prox::l1(double lam) {
  if (lam < 0) throw std::invalid_argument("Prox::l1: lam < 0");
  Prox p(Kind::l1);
  p.lam_ = lam;
  return p;
}

Prox Prox::tv(double lam) {
  if (lam < 0) throw std::invalid_argument("Prox::tv: lam < 0");
  Prox p(Kind::tv);
  p.lam_ = lam;
  return p;
}

Prox Prox::nlm(double sigma, int patch_distance, double cutoff) {
  if (sigma <= 0 || patch_distance < 1 || cutoff <= 0)
    throw std::invalid_argument("Prox::nlm: parameters must be positive");
  Prox p(Kind::nlm);
  p.nlm_sigma_ = sigma;
  p.nlm_patch_distance_ = patch_distance;
  p.nlm_cutoff_ = cutoff;
  return p;
}

Prox Prox::external(std::string command) {
  if (command.empty()) throw std::invalid_argument("Prox::external: empty command");
  Prox p(Kind::external);
  p.command_ = std::move(command);
  return p;
}

namespace {

Tensor run_external_denoiser(const std::string& command, const Tensor& v) {
  namespace fs = std::filesystem;
  static std::atomic<long> counter{0};
  const fs::path dir = fs::temp_directory_path();
  const std::string tag = "dip-prox-" + std::to_string(getpid()) + "-" +
                          std::to_string(++counter) + "-";
  const fs::path in_png = dir / (tag + "in.png");
  const fs::path out_png = dir / (tag + "out.png");
  write_png(in_png.string(), v);
  const std::string cmd = command + " " + in_png.string() + " " + out_png.string();
  const int rc = std::system(cmd.c_str());
  if (rc != 0) {
    fs::remove(in_png);
    throw std::runtime_error("external denoiser failed: " + cmd);
  }
  Tensor out = read_png(out_png.string());
  fs::remove(in_png);
  fs::remove(out_png);
  if (!out.same_shape(v))
    throw std::runtime_error("external denoiser changed the image shape");
  return out;
}

}  // namespace

Tensor Prox::apply(const Tensor& v, double scale) const {
  ++evals_;
  switch (kind_) {
    case Kind::none:
      return v;
    case Kind::l1:
      return soft_threshold(v, lam_ * scale);
    case Kind::tv:
      return prox_tv2d(v, lam_ * scale);
    case Kind::nlm:
      return nlm_denoise(v, nlm_sigma_, nlm_patch_distance_, nlm_cutoff_);
    case Kind::external:
      return run_external_denoiser(command_, v);
  }
  throw std::logic_error("Prox::apply: bad kind");
}

double Prox::objective(const Tensor& x) const {
  switch (kind_) {
    case Kind::l1: {
      double s = 0.0;
      for (double t : x.v) s += std::abs(t);
      return lam_ * s;
    }
    case Kind::tv:
      return lam_ * tv_norm(x);
    default:
      return 0.0;
  }
}

Tensor red_gradient(const Tensor& x, const Prox& denoiser) {
  return x - denoiser.apply(x);
}

}  // namespace dip
