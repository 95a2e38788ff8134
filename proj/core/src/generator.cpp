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

#include "dip/generator.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dip/rng.hpp"

namespace dip {
namespace {

// Reflect (edge not repeated): -1 -> 1, n -> n-2. Valid while |overshoot| < n.
inline int reflect(int i, int n) {
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return i;
}

inline double dot_n(const double* a, const double* b, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

std::vector<int> tap_table(int out_n, int in_n, int k, int stride) {
  const int pad = (k - 1) / 2;
  std::vector<int> idx(static_cast<std::size_t>(out_n) * k);
  for (int o = 0; o < out_n; ++o)
    for (int t = 0; t < k; ++t)
      idx[static_cast<std::size_t>(o) * k + t] = reflect(o * stride - pad + t, in_n);
  return idx;
}

int conv_out_n(int in_n, int stride) { return stride == 2 ? in_n / 2 : in_n; }

void conv_forward(const Tensor& in, const ConvSpec& cs, const double* theta,
                  Tensor& out, bool with_bias = true) {
  const int k = cs.k, C = cs.in_ch, OC = cs.out_ch;
  const double* W = theta + cs.weight_offset;
  const double* bias = with_bias ? theta + cs.bias_offset : nullptr;
  const auto rows = tap_table(out.h, in.h, k, cs.stride);
  const auto cols = tap_table(out.w, in.w, k, cs.stride);
  for (int oh = 0; oh < out.h; ++oh) {
    const int* rr = &rows[static_cast<std::size_t>(oh) * k];
    for (int ow = 0; ow < out.w; ++ow) {
      const int* cc = &cols[static_cast<std::size_t>(ow) * k];
      double* out_px = &out.v[(static_cast<std::size_t>(oh) * out.w + ow) * OC];
      for (int oc = 0; oc < OC; ++oc) {
        double acc = bias ? bias[oc] : 0.0;
        const double* woc = W + static_cast<std::size_t>(oc) * k * k * C;
        for (int kh = 0; kh < k; ++kh) {
          const double* in_row = &in.v[static_cast<std::size_t>(rr[kh]) * in.w * C];
          const double* wk = woc + static_cast<std::size_t>(kh) * k * C;
          for (int kw = 0; kw < k; ++kw)
            acc += dot_n(in_row + static_cast<std::size_t>(cc[kw]) * C,
                         wk + static_cast<std::size_t>(kw) * C, C);
        }
        out_px[oc] = acc;
      }
    }
  }
}

// Gradient with respect to the conv input (adjoint of conv_forward).
void conv_input_grad(const Tensor& g, const ConvSpec& cs, const double* theta,
                     Tensor& din) {
  const int k = cs.k, C = cs.in_ch, OC = cs.out_ch;
  const double* W = theta + cs.weight_offset;
  const auto rows = tap_table(g.h, din.h, k, cs.stride);
  const auto cols = tap_table(g.w, din.w, k, cs.stride);
  std::fill(din.v.begin(), din.v.end(), 0.0);
  for (int oh = 0; oh < g.h; ++oh) {
    const int* rr = &rows[static_cast<std::size_t>(oh) * k];
    for (int ow = 0; ow < g.w; ++ow) {
      const int* cc = &cols[static_cast<std::size_t>(ow) * k];
      const double* g_px = &g.v[(static_cast<std::size_t>(oh) * g.w + ow) * OC];
      for (int oc = 0; oc < OC; ++oc) {
        const double s = g_px[oc];
        if (s == 0.0) continue;
        const double* woc = W + static_cast<std::size_t>(oc) * k * k * C;
        for (int kh = 0; kh < k; ++kh) {
          double* d_row = &din.v[static_cast<std::size_t>(rr[kh]) * din.w * C];
          const double* wk = woc + static_cast<std::size_t>(kh) * k * C;
          for (int kw = 0; kw < k; ++kw) {
            double* d_px = d_row + static_cast<std::size_t>(cc[kw]) * C;
            const double* wp = wk + static_cast<std::size_t>(kw) * C;
            for (int ic = 0; ic < C; ++ic) d_px[ic] += s * wp[ic];
          }
        }
      }
    }
  }
}

// Gradient with respect to the conv weights and biases.
void conv_weight_grad(const Tensor& in, const Tensor& g, const ConvSpec& cs,
                      double* dtheta) {
  const int k = cs.k, C = cs.in_ch, OC = cs.out_ch;
  double* dW = dtheta + cs.weight_offset;
  double* db = dtheta + cs.bias_offset;
  const auto rows = tap_table(g.h, in.h, k, cs.stride);
  const auto cols = tap_table(g.w, in.w, k, cs.stride);
  for (int oh = 0; oh < g.h; ++oh) {
    const int* rr = &rows[static_cast<std::size_t>(oh) * k];
    for (int ow = 0; ow < g.w; ++ow) {
      const int* cc = &cols[static_cast<std::size_t>(ow) * k];
      const double* g_px = &g.v[(static_cast<std::size_t>(oh) * g.w + ow) * OC];
      for (int oc = 0; oc < OC; ++oc) {
        const double s = g_px[oc];
        db[oc] += s;
        if (s == 0.0) continue;
        double* woc = dW + static_cast<std::size_t>(oc) * k * k * C;
        for (int kh = 0; kh < k; ++kh) {
          const double* in_row = &in.v[static_cast<std::size_t>(rr[kh]) * in.w * C];
          double* wk = woc + static_cast<std::size_t>(kh) * k * C;
          for (int kw = 0; kw < k; ++kw) {
            const double* in_px = in_row + static_cast<std::size_t>(cc[kw]) * C;
            double* wp = wk + static_cast<std::size_t>(kw) * C;
            for (int ic = 0; ic < C; ++ic) wp[ic] += s * in_px[ic];
          }
        }
      }
    }
  }
}

// Bilinear 2x upsampling taps (align-corners = false), clamped at borders.
struct UpTaps {
  std::vector<int> i0, i1;
  std::vector<double> w0;  // weight of i0; weight of i1 is 1 - w0
};

UpTaps up_taps(int out_n, int in_n) {
  UpTaps t;
  t.i0.resize(out_n);
  t.i1.resize(out_n);
  t.w0.resize(out_n);
  for (int i = 0; i < out_n; ++i) {
    const double s = (i + 0.5) / 2.0 - 0.5;
    int lo = static_cast<int>(std::floor(s));
    const double f = s - lo;
    int hi = lo + 1;
    lo = std::min(std::max(lo, 0), in_n - 1);
    hi = std::min(std::max(hi, 0), in_n - 1);
    t.i0[i] = lo;
    t.i1[i] = hi;
    t.w0[i] = 1.0 - f;
  }
  return t;
}

Tensor upsample2(const Tensor& in) {
  Tensor out(in.h * 2, in.w * 2, in.c);
  const auto ty = up_taps(out.h, in.h);
  const auto tx = up_taps(out.w, in.w);
  const int C = in.c;
  for (int oy = 0; oy < out.h; ++oy) {
    const double wy0 = ty.w0[oy];
    const double* r0 = &in.v[static_cast<std::size_t>(ty.i0[oy]) * in.w * C];
    const double* r1 = &in.v[static_cast<std::size_t>(ty.i1[oy]) * in.w * C];
    for (int ox = 0; ox < out.w; ++ox) {
      const double wx0 = tx.w0[ox];
      const double* p00 = r0 + static_cast<std::size_t>(tx.i0[ox]) * C;
      const double* p01 = r0 + static_cast<std::size_t>(tx.i1[ox]) * C;
      const double* p10 = r1 + static_cast<std::size_t>(tx.i0[ox]) * C;
      const double* p11 = r1 + static_cast<std::size_t>(tx.i1[ox]) * C;
      double* o = &out.v[(static_cast<std::size_t>(oy) * out.w + ox) * C];
      for (int ch = 0; ch < C; ++ch)
        o[ch] = wy0 * (wx0 * p00[ch] + (1.0 - wx0) * p01[ch]) +
                (1.0 - wy0) * (wx0 * p10[ch] + (1.0 - wx0) * p11[ch]);
    }
  }
  return out;
}

Tensor upsample2_adjoint(const Tensor& g, int in_h, int in_w) {
  Tensor din(in_h, in_w, g.c);
  const auto ty = up_taps(g.h, in_h);
  const auto tx = up_taps(g.w, in_w);
  const int C = g.c;
  for (int oy = 0; oy < g.h; ++oy) {
    const double wy0 = ty.w0[oy];
    double* r0 = &din.v[static_cast<std::size_t>(ty.i0[oy]) * in_w * C];
    double* r1 = &din.v[static_cast<std::size_t>(ty.i1[oy]) * in_w * C];
    for (int ox = 0; ox < g.w; ++ox) {
      const double wx0 = tx.w0[ox];
      const double* gp = &g.v[(static_cast<std::size_t>(oy) * g.w + ox) * C];
      double* p00 = r0 + static_cast<std::size_t>(tx.i0[ox]) * C;
      double* p01 = r0 + static_cast<std::size_t>(tx.i1[ox]) * C;
      double* p10 = r1 + static_cast<std::size_t>(tx.i0[ox]) * C;
      double* p11 = r1 + static_cast<std::size_t>(tx.i1[ox]) * C;
      for (int ch = 0; ch < C; ++ch) {
        const double v = gp[ch];
        p00[ch] += wy0 * wx0 * v;
        p01[ch] += wy0 * (1.0 - wx0) * v;
        p10[ch] += (1.0 - wy0) * wx0 * v;
        p11[ch] += (1.0 - wy0) * (1.0 - wx0) * v;
      }
    }
  }
  return din;
}

void leaky_relu_inplace(Tensor& t, double slope) {
  for (double& x : t.v)
    if (x < 0) x *= slope;
}

void sigmoid_inplace(Tensor& t) {
  for (double& x : t.v) x = 1.0 / (1.0 + std::exp(-x));
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Generator::Generator(GeneratorConfig config, int out_h, int out_w, int out_c)
    : config_(std::move(config)), out_h_(out_h), out_w_(out_w), out_c_(out_c) {
  const int L = config_.levels();
  if (L < 1) throw std::invalid_argument("generator: need at least one level");
  if (config_.kernel_size < 1 || config_.kernel_size % 2 == 0)
    throw std::invalid_argument("generator: kernel size must be odd");
  if (config_.input_channels < 1)
    throw std::invalid_argument("generator: input_channels must be positive");
  for (int ch : config_.level_channels)
    if (ch < 1) throw std::invalid_argument("generator: level channels must be positive");
  if (out_c != 1 && out_c != 3)
    throw std::invalid_argument("generator: output channels must be 1 or 3");
  const int factor = 1 << L;
  if (out_h <= 0 || out_w <= 0 || out_h % factor != 0 || out_w % factor != 0)
    throw std::invalid_argument(
        "generator: spatial size must be a positive multiple of 2^levels");

  const auto& lc = config_.level_channels;
  const int k = config_.kernel_size;
  std::size_t off = 0;
  auto push_conv = [&](int in_ch, int out_ch, int kk, int stride) {
    ConvSpec cs;
    cs.in_ch = in_ch;
    cs.out_ch = out_ch;
    cs.k = kk;
    cs.stride = stride;
    cs.weight_offset = off;
    cs.bias_offset = off + static_cast<std::size_t>(out_ch) * kk * kk * in_ch;
    off += cs.weight_count();
    convs_.push_back(cs);
  };

  // Encoder: stride-2 convs down to the bottleneck.
  push_conv(config_.input_channels, lc[0], k, 2);
  for (int i = 1; i < L; ++i) push_conv(lc[i - 1], lc[i], k, 2);
  // Decoder: bilinear upsample + conv back up, mirroring the channel ladder.
  for (int i = L - 1; i >= 1; --i) push_conv(lc[i], lc[i - 1], k, 1);
  push_conv(lc[0], lc[0], k, 1);
  // Sigmoid head.
  push_conv(lc[0], out_c, 1, 1);

  weight_count_ = off;

  SplitMix64 sm(config_.seed);
  const std::uint64_t theta_seed = sm.next();
  const std::uint64_t z_seed = sm.next();

  theta0_.assign(weight_count_, 0.0);
  Rng wrng(theta_seed);
  for (const ConvSpec& cs : convs_) {
    const double a = std::sqrt(1.0 / (static_cast<double>(cs.in_ch) * cs.k * cs.k));
    double* W = theta0_.data() + cs.weight_offset;
    const std::size_t nw = static_cast<std::size_t>(cs.out_ch) * cs.k * cs.k * cs.in_ch;
    for (std::size_t i = 0; i < nw; ++i) W[i] = wrng.uniform(-a, a);
    // biases stay zero
  }

  z_ = Tensor(out_h_, out_w_, config_.input_channels);
  Rng zrng(z_seed);
  zrng.fill_gaussian(z_.v);
}

void Generator::check_theta(std::span<const double> theta) const {
  if (theta.size() != weight_count_)
    throw std::invalid_argument("generator: theta length mismatch");
}

Tensor Generator::forward(std::span<const double> theta) const {
  Tape tape;
  return forward(theta, tape);
}

Tensor Generator::forward(std::span<const double> theta, Tape& tape) const {
  check_theta(theta);
  const int L = config_.levels();
  const double slope = config_.leaky_slope;
  tape.conv_inputs.clear();
  tape.preacts.clear();

  Tensor x = z_;
  for (int i = 0; i < L; ++i) {
    const ConvSpec& cs = convs_[i];
    Tensor out(conv_out_n(x.h, cs.stride), conv_out_n(x.w, cs.stride), cs.out_ch);
    conv_forward(x, cs, theta.data(), out);
    tape.conv_inputs.push_back(std::move(x));
    tape.preacts.push_back(out);
    leaky_relu_inplace(out, slope);
    x = std::move(out);
  }
  for (int i = 0; i < L; ++i) {
    const ConvSpec& cs = convs_[L + i];
    Tensor up = upsample2(x);
    Tensor out(up.h, up.w, cs.out_ch);
    conv_forward(up, cs, theta.data(), out);
    tape.conv_inputs.push_back(std::move(up));
    tape.preacts.push_back(out);
    leaky_relu_inplace(out, slope);
    x = std::move(out);
  }
  const ConvSpec& head = convs_.back();
  Tensor out(x.h, x.w, head.out_ch);
  conv_forward(x, head, theta.data(), out);
  tape.conv_inputs.push_back(std::move(x));
  sigmoid_inplace(out);
  tape.output = out;
  return out;
}

std::vector<double> Generator::vjp(std::span<const double> theta,
                                   const Tape& tape, const Tensor& seed) const {
  check_theta(theta);
  if (!seed.same_shape(tape.output))
    throw std::invalid_argument("vjp: adjoint seed shape mismatch");
  const int L = config_.levels();
  const double slope = config_.leaky_slope;
  std::vector<double> dtheta(weight_count_, 0.0);

  // Sigmoid head backward.
  Tensor g = seed;
  for (int i = 0; i < g.size(); ++i) {
    const double s = tape.output.v[i];
    g.v[i] *= s * (1.0 - s);
  }
  const ConvSpec& head = convs_.back();
  conv_weight_grad(tape.conv_inputs[2 * L], g, head, dtheta.data());
  {
    Tensor dx(tape.conv_inputs[2 * L].h, tape.conv_inputs[2 * L].w, head.in_ch);
    conv_input_grad(g, head, theta.data(), dx);
    g = std::move(dx);
  }

  // Decoder blocks in reverse: leaky-ReLU, conv, then the upsample adjoint.
  for (int i = L - 1; i >= 0; --i) {
    const int j = L + i;
    const ConvSpec& cs = convs_[j];
    const Tensor& pre = tape.preacts[j];
    for (int t = 0; t < g.size(); ++t)
      if (pre.v[t] < 0) g.v[t] *= slope;
    conv_weight_grad(tape.conv_inputs[j], g, cs, dtheta.data());
    Tensor dx(tape.conv_inputs[j].h, tape.conv_inputs[j].w, cs.in_ch);
    conv_input_grad(g, cs, theta.data(), dx);
    g = upsample2_adjoint(dx, dx.h / 2, dx.w / 2);
  }

  // Encoder blocks in reverse.
  for (int i = L - 1; i >= 0; --i) {
    const ConvSpec& cs = convs_[i];
    const Tensor& pre = tape.preacts[i];
    for (int t = 0; t < g.size(); ++t)
      if (pre.v[t] < 0) g.v[t] *= slope;
    conv_weight_grad(tape.conv_inputs[i], g, cs, dtheta.data());
    if (i > 0) {
      Tensor dx(tape.conv_inputs[i].h, tape.conv_inputs[i].w, cs.in_ch);
      conv_input_grad(g, cs, theta.data(), dx);
      g = std::move(dx);
    }
    // gradient with respect to z is discarded
  }
  return dtheta;
}

std::vector<double> Generator::vjp(std::span<const double> theta,
                                   const Tensor& seed) const {
  Tape tape;
  forward(theta, tape);
  return vjp(theta, tape, seed);
}

Tensor Generator::jvp(std::span<const double> theta,
                      std::span<const double> dtheta, const Tape& tape) const {
  check_theta(theta);
  if (dtheta.size() != weight_count_)
    throw std::invalid_argument("jvp: dtheta length mismatch");
  const int L = config_.levels();
  const double slope = config_.leaky_slope;

  // Tangent-only propagation against the cached primal pass.
  Tensor tx(z_.h, z_.w, z_.c);  // dz = 0
  for (int j = 0; j < 2 * L; ++j) {
    const ConvSpec& cs = convs_[j];
    if (j >= L) tx = upsample2(tx);
    const Tensor& x_in = tape.conv_inputs[j];
    Tensor tout(tape.preacts[j].h, tape.preacts[j].w, cs.out_ch);
    conv_forward(x_in, cs, dtheta.data(), tout);  // conv(x; dW) + db
    Tensor tmp(tout.h, tout.w, cs.out_ch);
    conv_forward(tx, cs, theta.data(), tmp, /*with_bias=*/false);
    const Tensor& pre = tape.preacts[j];
    for (int t = 0; t < tout.size(); ++t) {
      double val = tout.v[t] + tmp.v[t];
      if (pre.v[t] < 0) val *= slope;
      tout.v[t] = val;
    }
    tx = std::move(tout);
  }
  const ConvSpec& head = convs_.back();
  Tensor tout(tape.output.h, tape.output.w, head.out_ch);
  conv_forward(tape.conv_inputs[2 * L], head, dtheta.data(), tout);
  Tensor tmp(tout.h, tout.w, head.out_ch);
  conv_forward(tx, head, theta.data(), tmp, /*with_bias=*/false);
  for (int t = 0; t < tout.size(); ++t) {
    const double s = tape.output.v[t];
    tout.v[t] = (tout.v[t] + tmp.v[t]) * s * (1.0 - s);
  }
  return tout;
}

Tensor Generator::jvp(std::span<const double> theta,
                      std::span<const double> dtheta) const {
  check_theta(theta);
  if (dtheta.size() != weight_count_)
    throw std::invalid_argument("jvp: dtheta length mismatch");
  const int L = config_.levels();
  const double slope = config_.leaky_slope;

  // Propagate (value, tangent) through the chain. For a conv,
  // d(conv(x; W, b)) = conv(dx; W, 0) + conv(x; dW, db).
  auto conv_pair = [&](const Tensor& x, const Tensor& tx, const ConvSpec& cs,
                       Tensor& out, Tensor& tout) {
    out = Tensor(conv_out_n(x.h, cs.stride), conv_out_n(x.w, cs.stride), cs.out_ch);
    tout = Tensor(out.h, out.w, cs.out_ch);
    conv_forward(x, cs, theta.data(), out);
    conv_forward(x, cs, dtheta.data(), tout);  // conv(x; dW) + db
    Tensor tmp(out.h, out.w, cs.out_ch);
    conv_forward(tx, cs, theta.data(), tmp, /*with_bias=*/false);
    for (int t = 0; t < tout.size(); ++t) tout.v[t] += tmp.v[t];
  };

  Tensor x = z_;
  Tensor tx(x.h, x.w, x.c);  // dz = 0
  for (int i = 0; i < L; ++i) {
    Tensor out, tout;
    conv_pair(x, tx, convs_[i], out, tout);
    for (int t = 0; t < out.size(); ++t)
      if (out.v[t] < 0) tout.v[t] *= slope;
    leaky_relu_inplace(out, slope);
    x = std::move(out);
    tx = std::move(tout);
  }
  for (int i = 0; i < L; ++i) {
    Tensor upx = upsample2(x);
    Tensor uptx = upsample2(tx);
    Tensor out, tout;
    conv_pair(upx, uptx, convs_[L + i], out, tout);
    for (int t = 0; t < out.size(); ++t)
      if (out.v[t] < 0) tout.v[t] *= slope;
    leaky_relu_inplace(out, slope);
    x = std::move(out);
    tx = std::move(tout);
  }
  Tensor out, tout;
  conv_pair(x, tx, convs_.back(), out, tout);
  for (int t = 0; t < out.size(); ++t) {
    const double s = 1.0 / (1.0 + std::exp(-out.v[t]));
    tout.v[t] *= s * (1.0 - s);
  }
  return tout;
}

std::string Generator::fingerprint() const {
  std::string canon = "lc=";
  for (std::size_t i = 0; i < config_.level_channels.size(); ++i) {
    if (i) canon += ',';
    canon += std::to_string(config_.level_channels[i]);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), ";k=%d;in=%d;slope=%.17g;h=%d;w=%d;c=%d;seed=%llu",
                config_.kernel_size, config_.input_channels, config_.leaky_slope,
                out_h_, out_w_, out_c_,
                static_cast<unsigned long long>(config_.seed));
  canon += buf;
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon)));
  return hex;
}

std::vector<double> loss_grad(const Generator& g, std::span<const double> theta,
                              const Tensor& seed) {
  return g.vjp(theta, seed);
}

}  // namespace dip
