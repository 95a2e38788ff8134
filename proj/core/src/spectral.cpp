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

#include "dip/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dip/rng.hpp"

namespace dip {

JjtOperator::JjtOperator(const Generator& g, std::vector<double> theta)
    : gen_(&g), theta_(std::move(theta)) {
  if (theta_.size() != g.weight_count())
    throw std::invalid_argument("JjtOperator: theta length mismatch");
  gen_->forward(theta_, tape_);
}

void JjtOperator::apply(std::span<const double> x, std::span<double> y) const {
  const int n = dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("JjtOperator: vector length mismatch");
  Tensor seed(gen_->out_h(), gen_->out_w(), gen_->out_c());
  std::copy(x.begin(), x.end(), seed.v.begin());
  const std::vector<double> jt = gen_->vjp(theta_, tape_, seed);
  const Tensor out = gen_->jvp(theta_, jt, tape_);
  std::copy(out.v.begin(), out.v.end(), y.begin());
}

std::vector<double> jjt_apply(const Generator& g, std::span<const double> theta,
                              std::span<const double> v) {
  JjtOperator op(g, std::vector<double>(theta.begin(), theta.end()));
  std::vector<double> out(op.dim());
  op.apply(v, out);
  return out;
}

namespace {

void orthogonalize_against(std::span<double> w,
                           const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& v : basis) axpy(-dot(v, w), v, w);
}

}  // namespace

SpectralBasis lanczos_topk(const SymmetricOperator& op, int k,
                           std::uint64_t seed) {
  const int n = op.dim();
  if (k < 1 || k > n)
    throw std::invalid_argument("lanczos_topk: need 1 <= k <= dim");
  const int max_iters = std::min<long>(n, 10L * k);
  const double accept_tol = 1e-8;

  std::vector<std::vector<double>> V;
  std::vector<double> alpha, beta;  // beta[j] couples v_j and v_{j+1}
  Rng rng(seed);

  {
    std::vector<double> v0(n);
    rng.fill_gaussian(v0);
    scale(v0, 1.0 / norm2(v0));
    V.push_back(std::move(v0));
  }

  std::vector<double> w(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_solver;
  bool converged = false;
  int j = 0;
  int next_check = std::min(max_iters, std::max(k, 8));

  while (j < max_iters) {
    ++j;
    op.apply(V[j - 1], w);
    if (j > 1) axpy(-beta[j - 2], V[j - 2], w);
    const double a = dot(V[j - 1], w);
    alpha.push_back(a);
    axpy(-a, V[j - 1], w);
    orthogonalize_against(w, V);  // full reorthogonalization

    double b = norm2(w);
    const bool room_left = j < n;
    if (b <= 1e-13 * std::max(1.0, std::abs(a)) && room_left) {
      // Invariant subspace found: restart with a fresh orthogonal direction.
      std::vector<double> fresh(n);
      rng.fill_gaussian(fresh);
      orthogonalize_against(fresh, V);
      const double nf = norm2(fresh);
      if (nf == 0.0) break;
      scale(fresh, 1.0 / nf);
      beta.push_back(0.0);
      V.push_back(std::move(fresh));
    } else if (room_left) {
      beta.push_back(b);
      std::vector<double> next = w;
      scale(next, 1.0 / b);
      V.push_back(std::move(next));
    } else {
      beta.push_back(0.0);  // Krylov space exhausted at j == n
    }

    if (j >= next_check || j == max_iters || j == n) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
      for (int i = 0; i < j; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      tri_solver.compute(T);
      const auto& vals = tri_solver.eigenvalues();  // ascending
      const double lambda_max = std::max(std::abs(vals(j - 1)), std::abs(vals(0)));
      const double tail = beta[j - 1];
      bool all_ok = j >= k;
      for (int i = 0; all_ok && i < k; ++i) {
        const double resid =
            std::abs(tail * tri_solver.eigenvectors()(j - 1, j - 1 - i));
        if (resid > accept_tol * std::max(lambda_max, 1e-300)) all_ok = false;
      }
      if (all_ok) {
        converged = true;
        break;
      }
      if (j == n) break;
      next_check = std::min(max_iters, j + std::max(10, j / 10));
    }
  }

  // Assemble the top-k Ritz pairs from the last tridiagonal solve.
  SpectralBasis basis;
  basis.n = n;
  basis.converged = converged || j == n;
  basis.eigenvalues.resize(k);
  basis.vectors.assign(static_cast<std::size_t>(k) * n, 0.0);
  const auto& vals = tri_solver.eigenvalues();
  const auto& vecs = tri_solver.eigenvectors();
  const double lambda_max = std::abs(vals(j - 1));
  for (int i = 0; i < k; ++i) {
    const int col = j - 1 - i;  // descending order
    double lam = vals(col);
    if (lam < 0 && -lam <= 1e-12 * std::max(lambda_max, 1.0)) lam = 0.0;
    basis.eigenvalues[i] = lam;
    double* out = basis.vectors.data() + static_cast<std::size_t>(i) * n;
    for (int l = 0; l < j; ++l) {
      const double c = vecs(l, col);
      if (c != 0.0) axpy(c, V[l], {out, static_cast<std::size_t>(n)});
    }
    const double nv = norm2({out, static_cast<std::size_t>(n)});
    if (nv > 0) scale({out, static_cast<std::size_t>(n)}, 1.0 / nv);
  }
  return basis;
}

std::vector<double> project(const SpectralBasis& basis,
                            std::span<const double> v) {
  if (static_cast<int>(v.size()) != basis.n)
    throw std::invalid_argument("project: vector length mismatch");
  std::vector<double> coeffs(basis.k());
  for (int i = 0; i < basis.k(); ++i) coeffs[i] = dot(basis.vector(i), v);
  return coeffs;
}

std::vector<double> predict_residual(const SpectralBasis& basis,
                                     std::span<const double> r0, double eta,
                                     int t) {
  if (static_cast<int>(r0.size()) != basis.n)
    throw std::invalid_argument("predict_residual: vector length mismatch");
  if (t < 0) throw std::invalid_argument("predict_residual: t < 0");
  std::vector<double> r(r0.begin(), r0.end());
  if (t == 0 || eta == 0.0) return r;
  for (int i = 0; i < basis.k(); ++i) {
    const auto u = basis.vector(i);
    const double c = dot(u, r0);
    const double f = std::pow(1.0 - eta * basis.eigenvalues[i], t);
    axpy((f - 1.0) * c, u, r);
  }
  return r;
}

BoundTerms bound_terms(const SpectralBasis& full_basis, const Generator& g,
                       std::span<const double> x_true,
                       std::span<const double> noise, double eta, int t,
                       int p) {
  const int n = full_basis.n;
  if (full_basis.k() != n)
    throw std::invalid_argument(
        "bound_terms: full spectrum required (the bound needs sigma_min)");
  if (g.out_size() != n)
    throw std::invalid_argument("bound_terms: generator size mismatch");
  if (static_cast<int>(x_true.size()) != n ||
      static_cast<int>(noise.size()) != n)
    throw std::invalid_argument("bound_terms: vector length mismatch");
  if (p < 1 || p > n) throw std::invalid_argument("bound_terms: bad p");
  if (t < 0) throw std::invalid_argument("bound_terms: t < 0");

  const Tensor g0 = g.forward(g.theta0());
  std::vector<double> r0(n);
  for (int i = 0; i < n; ++i) r0[i] = g0.v[i] - (x_true[i] + noise[i]);

  const double sigma2_min = full_basis.eigenvalues[n - 1];
  const double sigma2_p = full_basis.eigenvalues[p - 1];

  BoundTerms out{};
  out.init_term = std::pow(1.0 - eta * sigma2_min, t) * norm2(g0.v);
  out.signal_term = std::pow(1.0 - eta * sigma2_p, t) * norm2(x_true);

  double noise_sq = 0.0;
  std::vector<double> rt(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto u = full_basis.vector(i);
    const double decay = std::pow(1.0 - eta * full_basis.eigenvalues[i], t);
    const double ce = dot(u, noise);
    noise_sq += (1.0 - decay) * (1.0 - decay) * ce * ce;
    axpy(decay * dot(u, r0), u, rt);
  }
  out.noise_term = std::sqrt(noise_sq);

  // G_lin(theta_t) - x_true = r_t + noise, since b = x_true + noise.
  double lhs_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = rt[i] + noise[i];
    lhs_sq += d * d;
  }
  out.lhs = std::sqrt(lhs_sq);
  return out;
}

}  // namespace dip
