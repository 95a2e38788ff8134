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

#include "dip/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dip/adam.hpp"
#include "dip/metrics.hpp"

namespace dip {
namespace {

// Per-iteration bookkeeping: EMA of the iterates, PSNR columns, callbacks.
class Recorder {
 public:
  Recorder(const SolverConfig& cfg, const Tensor* ground_truth,
           const RecordCallback& on_record)
      : cfg_(cfg), gt_(ground_truth), cb_(on_record), t0_(process_cpu_seconds()) {}

  void observe(int iter, const Tensor& image, double loss) {
    if (ema_.size() == 0)
      ema_ = image;
    else
      ema_ = ema_smooth(ema_, image);
    if (!should_record(iter)) return;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    TraceRow row;
    row.iter = iter;
    row.cpu_seconds = process_cpu_seconds() - t0_;
    row.loss = loss;
    row.psnr = gt_ ? psnr(*gt_, image) : nan;
    row.psnr_ema = gt_ ? psnr(*gt_, ema_) : nan;
    trace_.push_back(row);
    if (cb_) cb_(iter, image, ema_);
  }

  RunTrace take_trace() { return std::move(trace_); }
  const Tensor& ema() const { return ema_; }
  std::size_t trace_size() const { return trace_.size(); }

 private:
  bool should_record(int iter) const {
    if (iter == 1 || iter == cfg_.iters) return true;
    return cfg_.record_every > 0 && iter % cfg_.record_every == 0;
  }

  const SolverConfig& cfg_;
  const Tensor* gt_;
  const RecordCallback& cb_;
  double t0_;
  Tensor ema_;
  RunTrace trace_;
};

// One theta update, Adam or plain gradient descent.
struct ThetaStepper {
  ThetaStepper(const SolverConfig& cfg, std::size_t n)
      : use_adam(cfg.optimizer == SolverConfig::Optimizer::adam),
        lr(cfg.lr),
        adam(n, cfg.lr) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad) {
    if (use_adam) {
      adam_step(adam, theta, grad);
    } else {
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
    }
  }

  bool use_adam;
  double lr;
  AdamState adam;
};

Tensor zero_fill(const MeasurementOp& op, std::span<const double> b, int h,
                 int w, int c) {
  Tensor x(h, w, c);
  op.adjoint(b, x.v);
  return x;
}

// Proximal gradient steps on 0.5*||Ax-b||^2 + R(x) + (rho/2)*||x-anchor||^2
// with fixed step 1/(gram + rho).
Tensor prox_grad_steps(std::span<const double> b, const LinearOperator& op,
                       const Prox& prior, int iters, Tensor x, double rho,
                       const Tensor* anchor, double gram) {
  const double beta = 1.0 / (gram + rho);
  std::vector<double> r(op.rows()), g(op.cols());
  for (int it = 0; it < iters; ++it) {
    op.apply(x.v, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    op.adjoint(r, g);
    if (rho > 0 && anchor)
      for (int i = 0; i < x.size(); ++i) g[i] += rho * (x.v[i] - anchor->v[i]);
    Tensor step = x;
    for (int i = 0; i < x.size(); ++i) step.v[i] -= beta * g[i];
    x = prior.apply(step, beta);
  }
  return x;
}

void validate_common(const SolverConfig& cfg) {
  if (cfg.iters < 1) throw std::invalid_argument("solver: iters must be >= 1");
  if (cfg.rho <= 0) throw std::invalid_argument("solver: rho must be positive");
  if (cfg.inner_ista < 1)
    throw std::invalid_argument("solver: inner_ista must be >= 1");
}

}  // namespace

double data_objective(std::span<const double> b, const LinearOperator& op,
                      const Tensor& x) {
  std::vector<double> r(op.rows());
  op.apply(x.v, r);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - b[i];
    s += d * d;
  }
  return 0.5 * s;
}

Tensor ista(std::span<const double> b, const LinearOperator& op,
            const Prox& prior, int iters, const Tensor& x0, double rho,
            const Tensor* anchor) {
  if (iters < 1) throw std::invalid_argument("ista: iters must be >= 1");
  if (x0.size() != op.cols()) throw std::invalid_argument("ista: x0 size mismatch");
  return prox_grad_steps(b, op, prior, iters, x0, rho, anchor,
                         operator_norm(op));
}

Tensor fista(std::span<const double> b, const LinearOperator& op,
             const Prox& prior, int iters, const Tensor& x0) {
  if (iters < 1) throw std::invalid_argument("fista: iters must be >= 1");
  if (x0.size() != op.cols())
    throw std::invalid_argument("fista: x0 size mismatch");
  const double gram = operator_norm(op);
  const double beta = 1.0 / gram;

  auto objective = [&](const Tensor& t) {
    return data_objective(b, op, t) + prior.objective(t);
  };
  auto prox_step_from = [&](const Tensor& point) {
    std::vector<double> r(op.rows()), g(op.cols());
    op.apply(point.v, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    op.adjoint(r, g);
    Tensor step = point;
    for (int i = 0; i < step.size(); ++i) step.v[i] -= beta * g[i];
    return prior.apply(step, beta);
  };

  Tensor x = x0, y = x0;
  double fx = objective(x);
  double tk = 1.0;
  for (int it = 0; it < iters; ++it) {
    Tensor cand = prox_step_from(y);
    double fc = objective(cand);
    if (fc > fx) {
      // Momentum overshot: restart from x with a plain step, which cannot
      // increase the objective.
      cand = prox_step_from(x);
      fc = objective(cand);
      tk = 1.0;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = cand;
    const double mom = (tk - 1.0) / t_next;
    for (int i = 0; i < y.size(); ++i) y.v[i] += mom * (cand.v[i] - x.v[i]);
    x = std::move(cand);
    fx = fc;
    tk = t_next;
  }
  return x;
}

SolveResult dip_gd(const Generator& g, const Measurement& meas,
                   const Prox& prior, const SolverConfig& cfg,
                   const Tensor* ground_truth, const RecordCallback& on_record) {
  validate_common(cfg);
  const MeasurementOp& op = meas.op;
  if (op.cols() != g.out_size())
    throw std::invalid_argument("dip_gd: operator/generator size mismatch");

  std::vector<double> theta = g.theta0();
  ThetaStepper stepper(cfg, theta.size());
  Recorder rec(cfg, ground_truth, on_record);
  const long prox0 = prior.eval_count();

  Generator::Tape tape;
  Tensor cur = g.forward(theta, tape);
  std::vector<double> r(op.rows()), atr(op.cols());

  for (int t = 1; t <= cfg.iters; ++t) {
    op.apply(cur.v, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= meas.b[i];
    op.adjoint(r, atr);
    Tensor seed(cur.h, cur.w, cur.c);
    seed.v = atr;
    if (cfg.red_lambda > 0) {
      const Tensor f = prior.apply(cur);
      for (int i = 0; i < cur.size(); ++i)
        seed.v[i] += cfg.red_lambda * (cur.v[i] - f.v[i]);
    }
    const std::vector<double> grad = g.vjp(theta, tape, seed);
    stepper.step(theta, grad);
    cur = g.forward(theta, tape);

    double loss = data_objective(meas.b, op, cur);
    if (cfg.red_lambda > 0) {
      const Tensor f = prior.apply(cur);
      double cross = 0.0;
      for (int i = 0; i < cur.size(); ++i)
        cross += cur.v[i] * (cur.v[i] - f.v[i]);
      loss += cfg.red_lambda * 0.5 * cross;
    }
    rec.observe(t, cur, loss);
  }

  SolveResult out;
  out.image = std::move(cur);
  out.ema = rec.ema();
  out.trace = rec.take_trace();
  out.theta = std::move(theta);
  out.prox_calls = prior.eval_count() - prox0;
  return out;
}

SolveResult dip_admm_v1(const Generator& g, const Measurement& meas,
                        const Prox& prior, const SolverConfig& cfg,
                        const Tensor* ground_truth,
                        const RecordCallback& on_record) {
  validate_common(cfg);
  const MeasurementOp& op = meas.op;
  if (op.cols() != g.out_size())
    throw std::invalid_argument("dip_admm_v1: operator/generator size mismatch");

  std::vector<double> theta = g.theta0();
  ThetaStepper stepper(cfg, theta.size());
  Recorder rec(cfg, ground_truth, on_record);
  const long prox0 = prior.eval_count();
  const double gram = operator_norm(op);

  Tensor x = zero_fill(op, meas.b, g.out_h(), g.out_w(), g.out_c());
  Tensor u(g.out_h(), g.out_w(), g.out_c());
  Generator::Tape tape;
  Tensor cur = g.forward(theta, tape);
  std::vector<double> gaps;

  for (int t = 1; t <= cfg.iters; ++t) {
    const Tensor anchor = cur - u;
    x = prox_grad_steps(meas.b, op, prior, cfg.inner_ista, std::move(x),
                        cfg.rho, &anchor, gram);

    Tensor seed(cur.h, cur.w, cur.c);
    for (int i = 0; i < cur.size(); ++i)
      seed.v[i] = cfg.rho * (cur.v[i] - x.v[i] - u.v[i]);
    const std::vector<double> grad = g.vjp(theta, tape, seed);
    stepper.step(theta, grad);
    cur = g.forward(theta, tape);

    for (int i = 0; i < u.size(); ++i)
      u.v[i] += cfg.dual_step * (x.v[i] - cur.v[i]);

    // Constrained objective evaluated at x = G(theta_t), comparable with v2.
    const double loss = data_objective(meas.b, op, cur) + prior.objective(cur);
    const std::size_t rows = rec.trace_size();
    rec.observe(t, cur, loss);
    if (rec.trace_size() > rows) gaps.push_back(norm2((x - cur).v));
  }

  SolveResult out;
  out.image = std::move(cur);
  out.ema = rec.ema();
  out.trace = rec.take_trace();
  out.theta = std::move(theta);
  out.x = std::move(x);
  out.u = std::move(u);
  out.constraint_gap = std::move(gaps);
  out.prox_calls = prior.eval_count() - prox0;
  return out;
}

SolveResult dip_admm_v2(const Generator& g, const Measurement& meas,
                        const Prox& prior, const SolverConfig& cfg,
                        const Tensor* ground_truth,
                        const RecordCallback& on_record) {
  validate_common(cfg);
  const MeasurementOp& op = meas.op;
  if (op.cols() != g.out_size())
    throw std::invalid_argument("dip_admm_v2: operator/generator size mismatch");

  std::vector<double> theta = g.theta0();
  ThetaStepper stepper(cfg, theta.size());
  Recorder rec(cfg, ground_truth, on_record);
  const long prox0 = prior.eval_count();

  Tensor x = zero_fill(op, meas.b, g.out_h(), g.out_w(), g.out_c());
  Tensor u(g.out_h(), g.out_w(), g.out_c());
  Generator::Tape tape;
  Tensor cur = g.forward(theta, tape);
  std::vector<double> r(op.rows()), atr(op.cols());
  std::vector<double> gaps;

  for (int t = 1; t <= cfg.iters; ++t) {
    x = prior.apply(cur - u, 1.0 / cfg.rho);  // the only prox call per round

    op.apply(cur.v, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= meas.b[i];
    op.adjoint(r, atr);
    Tensor seed(cur.h, cur.w, cur.c);
    for (int i = 0; i < cur.size(); ++i)
      seed.v[i] = atr[i] + cfg.rho * (cur.v[i] - x.v[i] - u.v[i]);
    const std::vector<double> grad = g.vjp(theta, tape, seed);
    stepper.step(theta, grad);
    cur = g.forward(theta, tape);

    for (int i = 0; i < u.size(); ++i)
      u.v[i] += cfg.dual_step * (x.v[i] - cur.v[i]);

    const double loss = data_objective(meas.b, op, cur) + prior.objective(cur);
    const std::size_t rows = rec.trace_size();
    rec.observe(t, cur, loss);
    if (rec.trace_size() > rows) gaps.push_back(norm2((x - cur).v));
  }

  SolveResult out;
  out.image = std::move(cur);
  out.ema = rec.ema();
  out.trace = rec.take_trace();
  out.theta = std::move(theta);
  out.x = std::move(x);
  out.u = std::move(u);
  out.constraint_gap = std::move(gaps);
  out.prox_calls = prior.eval_count() - prox0;
  return out;
}

Tensor pnp_y_step(std::span<const double> atb, std::span<const double> gram_diag,
                  double rho, const Tensor& x, const Tensor& u) {
  Tensor y(x.h, x.w, x.c);
  for (int i = 0; i < y.size(); ++i)
    y.v[i] = (atb[i] + rho * (x.v[i] + u.v[i])) / (gram_diag[i] + rho);
  return y;
}

SolveResult pnp_admm(const Measurement& meas, int h, int w, int c,
                     const Prox& prior, const SolverConfig& cfg,
                     const Tensor* ground_truth,
                     const RecordCallback& on_record) {
  validate_common(cfg);
  const MeasurementOp& op = meas.op;
  if (op.cols() != h * w * c)
    throw std::invalid_argument("pnp_admm: shape/operator size mismatch");

  Recorder rec(cfg, ground_truth, on_record);
  const long prox0 = prior.eval_count();

  std::vector<double> atb(op.cols());
  op.adjoint(meas.b, atb);
  const std::vector<double> diag = op.gram_diagonal();

  Tensor y(h, w, c);
  y.v = atb;  // zero-fill warm start
  Tensor x(h, w, c), u(h, w, c);

  for (int t = 1; t <= cfg.iters; ++t) {
    x = prior.apply(y - u, 1.0 / cfg.rho);
    y = pnp_y_step(atb, diag, cfg.rho, x, u);
    for (int i = 0; i < u.size(); ++i)
      u.v[i] += cfg.dual_step * (x.v[i] - y.v[i]);

    const double loss = data_objective(meas.b, op, y) + prior.objective(x);
    rec.observe(t, x, loss);
  }

  SolveResult out;
  out.image = x;
  out.ema = rec.ema();
  out.trace = rec.take_trace();
  out.x = std::move(x);
  out.u = std::move(u);
  out.prox_calls = prior.eval_count() - prox0;
  return out;
}

SolveResult directional_fit(const Generator& g, const Tensor& b,
                            const SpectralBasis& basis, int p,
                            const SolverConfig& cfg,
                            const Tensor* ground_truth,
                            const RecordCallback& on_record) {
  validate_common(cfg);
  if (basis.n != g.out_size())
    throw std::invalid_argument("directional_fit: basis/generator size mismatch");
  if (b.size() != g.out_size())
    throw std::invalid_argument("directional_fit: target size mismatch");
  if (p < 0 || p > basis.k())
    throw std::invalid_argument("directional_fit: p exceeds available vectors");

  std::vector<double> theta = g.theta0();
  ThetaStepper stepper(cfg, theta.size());
  Recorder rec(cfg, ground_truth, on_record);

  Generator::Tape tape;
  Tensor cur = g.forward(theta, tape);

  auto projected = [&](const Tensor& img, Tensor* seed_out) {
    // seed = Ubar Ubar^T (img - b); returns 0.5 * ||Ubar^T (img - b)||^2
    Tensor diff = img - b;
    if (seed_out) *seed_out = Tensor(img.h, img.w, img.c);
    double loss = 0.0;
    for (int i = 0; i < p; ++i) {
      const auto ui = basis.vector(i);
      const double ci = dot(ui, diff.v);
      loss += ci * ci;
      if (seed_out) axpy(ci, ui, seed_out->v);
    }
    return 0.5 * loss;
  };

  for (int t = 1; t <= cfg.iters; ++t) {
    Tensor seed;
    projected(cur, &seed);
    const std::vector<double> grad = g.vjp(theta, tape, seed);
    stepper.step(theta, grad);
    cur = g.forward(theta, tape);
    rec.observe(t, cur, projected(cur, nullptr));
  }

  SolveResult out;
  out.image = std::move(cur);
  out.ema = rec.ema();
  out.trace = rec.take_trace();
  out.theta = std::move(theta);
  return out;
}

}  // namespace dip
