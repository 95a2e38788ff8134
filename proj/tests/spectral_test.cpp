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

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "dip/experiment.hpp"
#include "dip/solvers.hpp"
#include "dip/spectral.hpp"
#include "test_support.hpp"

using namespace dip;
using dip::testing::tiny_generator;

namespace {

class DiagSymOperator final : public SymmetricOperator {
 public:
  explicit DiagSymOperator(std::vector<double> d) : d_(std::move(d)) {}
  int dim() const override { return static_cast<int>(d_.size()); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    for (std::size_t i = 0; i < d_.size(); ++i) y[i] = d_[i] * x[i];
  }

 private:
  std::vector<double> d_;
};

/// J assembled column-by-column through forward-mode products.
Eigen::MatrixXd assemble_jacobian(const Generator& g,
                                  const std::vector<double>& theta) {
  const int n = g.out_size();
  const auto w = g.weight_count();
  Generator::Tape tape;
  g.forward(theta, tape);
  Eigen::MatrixXd J(n, static_cast<int>(w));
  std::vector<double> e(w, 0.0);
  for (std::size_t j = 0; j < w; ++j) {
    e[j] = 1.0;
    const Tensor col = g.jvp(theta, e, tape);
    for (int i = 0; i < n; ++i) J(i, static_cast<int>(j)) = col.v[i];
    e[j] = 0.0;
  }
  return J;
}

}  // namespace

TEST_CASE("jvp and vjp are adjoint") {
  const Generator g = tiny_generator(8, 8, 1, 15);
  const std::vector<double> theta = g.theta0();
  const auto dtheta = dip::testing::random_vector(g.weight_count(), 1);
  Tensor v(8, 8, 1);
  Rng rng(2);
  for (double& x : v.v) x = rng.gaussian();

  const Tensor jd = g.jvp(theta, dtheta);
  const std::vector<double> jtv = g.vjp(theta, v);
  const double lhs = dot(jd.v, v.v);
  const double rhs = dot(dtheta, jtv);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("jvp matches central finite differences along random directions") {
  const Generator g = tiny_generator(8, 8, 1, 16);
  const std::vector<double> theta = g.theta0();
  const double h = 1e-4;

  Rng rng(3);
  int checked = 0, attempts = 0;
  while (checked < 5 && attempts < 50) {
    ++attempts;
    std::vector<double> d(g.weight_count());
    for (double& x : d) x = rng.gaussian();
    const double nd = norm2(d);
    for (double& x : d) x /= nd;

    // Reject directions whose FD interval crosses an activation kink.
    std::vector<double> tp = theta, tm = theta;
    axpy(h, d, tp);
    axpy(-h, d, tm);
    Generator::Tape plus, minus;
    const Tensor fp = g.forward(tp, plus);
    const Tensor fm = g.forward(tm, minus);
    bool smooth = true;
    for (std::size_t l = 0; smooth && l < plus.preacts.size(); ++l)
      for (int t = 0; t < plus.preacts[l].size(); ++t)
        if ((plus.preacts[l].v[t] < 0) != (minus.preacts[l].v[t] < 0)) {
          smooth = false;
          break;
        }
    if (!smooth) continue;
    ++checked;

    const Tensor jd = g.jvp(theta, d);
    double num = 0, den = 0;
    for (int i = 0; i < jd.size(); ++i) {
      const double fd = (fp.v[i] - fm.v[i]) / (2 * h);
      num += (jd.v[i] - fd) * (jd.v[i] - fd);
      den += fd * fd;
    }
    CHECK(std::sqrt(num) <= 1e-5 * std::max(std::sqrt(den), 1e-8));
  }
  CHECK(checked == 5);
}

TEST_CASE("jvp of the zero direction is zero") {
  const Generator g = tiny_generator(8, 8, 1, 17);
  const std::vector<double> zero(g.weight_count(), 0.0);
  const Tensor out = g.jvp(g.theta0(), zero);
  for (double v : out.v) CHECK(v == 0.0);
}

TEST_CASE("jjt operator is symmetric positive semidefinite") {
  const Generator g = tiny_generator(8, 8, 1, 18);
  const JjtOperator op(g, g.theta0());
  const int n = op.dim();

  std::vector<double> a = dip::testing::random_vector(n, 4);
  std::vector<double> b = dip::testing::random_vector(n, 5);
  std::vector<double> ja(n), jb(n);
  op.apply(a, ja);
  op.apply(b, jb);

  CHECK(dot(a, ja) >= 0.0);
  CHECK(dot(b, jb) >= 0.0);
  const double s1 = dot(a, jb), s2 = dot(ja, b);
  CHECK(std::abs(s1 - s2) <= 1e-10 * std::max(1.0, std::abs(s1)));
}

TEST_CASE("jjt operator matches the densely assembled Gram matrix") {
  const Generator g = tiny_generator(4, 4, 3, 19, {3}, 2);  // n = 48
  const std::vector<double> theta = g.theta0();
  const Eigen::MatrixXd J = assemble_jacobian(g, theta);
  const Eigen::MatrixXd M = J * J.transpose();

  const JjtOperator op(g, theta);
  const int n = op.dim();
  std::vector<double> e(n, 0.0), col(n);
  double max_diff = 0.0;
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i)
      max_diff = std::max(max_diff, std::abs(col[i] - M(i, j)));
  }
  CHECK(max_diff <= 1e-10);
}

TEST_CASE("lanczos: descending diagonal operator recovers top pairs exactly") {
  std::vector<double> d(10);
  for (int i = 0; i < 10; ++i) d[i] = 10.0 - i;  // 10, 9, ..., 1
  const DiagSymOperator op(d);
  const SpectralBasis basis = lanczos_topk(op, 2, 3);

  REQUIRE(basis.k() == 2);
  CHECK(basis.converged);
  CHECK(basis.eigenvalues[0] == doctest::Approx(10.0).epsilon(1e-10));
  CHECK(basis.eigenvalues[1] == doctest::Approx(9.0).epsilon(1e-10));
  // vectors are +-e_0 and +-e_1
  CHECK(std::abs(basis.vector(0)[0]) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(basis.vector(1)[1]) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lanczos matches a dense eigensolver on a tiny generator") {
  const Generator g = tiny_generator(8, 8, 3, 20, {4, 8}, 4);  // n = 192
  const JjtOperator op(g, g.theta0());
  const int n = op.dim();

  Eigen::MatrixXd M(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) M(i, j) = col[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(M);

  const int k = 10;
  const SpectralBasis basis = lanczos_topk(op, k, 11);
  REQUIRE(basis.k() == k);
  for (int i = 0; i < k; ++i) {
    const double expect = dense.eigenvalues()(n - 1 - i);
    CHECK(std::abs(basis.eigenvalues[i] - expect) <= 1e-6 * expect);
  }
}

TEST_CASE("lanczos basis is orthonormal") {
  const Generator g = tiny_generator(8, 8, 1, 21);
  const JjtOperator op(g, g.theta0());
  const SpectralBasis basis = lanczos_topk(op, 12, 9);
  for (int i = 0; i < basis.k(); ++i) {
    CHECK(std::abs(norm2(basis.vector(i)) - 1.0) <= 1e-8);
    for (int j = i + 1; j < basis.k(); ++j)
      CHECK(std::abs(dot(basis.vector(i), basis.vector(j))) <= 1e-6);
  }
  for (int i = 0; i + 1 < basis.k(); ++i)
    CHECK(basis.eigenvalues[i] >= basis.eigenvalues[i + 1]);
  for (double ev : basis.eigenvalues) CHECK(ev >= 0.0);
}

TEST_CASE("lanczos eigenvalues do not depend on the starting seed") {
  const Generator g = tiny_generator(8, 8, 1, 22);
  const JjtOperator op(g, g.theta0());
  const SpectralBasis a = lanczos_topk(op, 8, 1);
  const SpectralBasis b = lanczos_topk(op, 8, 2);
  for (int i = 0; i < 8; ++i)
    CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) <=
          1e-8 * std::max(a.eigenvalues[0], 1.0));
}

TEST_CASE("lanczos flags non-convergence and returns partial results") {
  // A tight cluster around the top eigenvalue starves a 10-iteration budget.
  std::vector<double> d(400);
  for (int i = 0; i < 400; ++i) d[i] = 1.0 + 1e-3 * i / 400.0;
  const DiagSymOperator op(d);
  const SpectralBasis basis = lanczos_topk(op, 1, 4);
  CHECK(!basis.converged);
  CHECK(basis.k() == 1);
  CHECK(basis.eigenvalues[0] > 1.0);  // still a usable estimate
}

TEST_CASE("spectrum decays sharply on a desk-scale generator") {
  // Regression anchor: at 20% of n the spectrum has fallen by >= 1e3.
  const Generator g = tiny_generator(16, 16, 3, 23, {8, 16}, 8);  // n = 768
  const JjtOperator op(g, g.theta0());
  const int k = 160;  // > 0.2 * 768 = 154
  const SpectralBasis basis = lanczos_topk(op, k, 12);
  CHECK(basis.eigenvalues[153] / basis.eigenvalues[0] <= 1e-3);
}

TEST_CASE("project: basis vectors give unit coordinates, Bessel holds") {
  const Generator g = tiny_generator(8, 8, 1, 24);
  const JjtOperator op(g, g.theta0());
  const SpectralBasis basis = lanczos_topk(op, 6, 13);

  std::vector<double> u3(basis.vector(3).begin(), basis.vector(3).end());
  const std::vector<double> c = project(basis, u3);
  for (int i = 0; i < basis.k(); ++i)
    CHECK(std::abs(c[i] - (i == 3 ? 1.0 : 0.0)) <= 1e-6);

  const auto v = dip::testing::random_vector(basis.n, 6);
  const std::vector<double> cv = project(basis, v);
  double energy = 0;
  for (double x : cv) energy += x * x;
  CHECK(energy <= dot(v, v) + 1e-9);
}

TEST_CASE("project: image energy concentrates in leading directions") {
  const Generator g = tiny_generator(8, 8, 3, 25, {4, 8}, 4);  // n = 192
  const JjtOperator op(g, g.theta0());
  const SpectralBasis basis = lanczos_topk(op, 60, 14);

  const Tensor img = synthetic_test_image(8, 8, 3);
  std::vector<double> noise =
      add_gaussian_noise(std::vector<double>(basis.n, 0.0), 1.0, 15);
  const double scale = norm2(img.v) / norm2(noise);
  for (double& x : noise) x *= scale;  // matched norm

  auto top_fraction = [&](const std::vector<double>& v) {
    const std::vector<double> c = project(basis, v);
    double top = 0, all = 0;
    for (int i = 0; i < basis.k(); ++i) {
      all += c[i] * c[i];
      if (i < basis.k() / 10) top += c[i] * c[i];
    }
    return top / all;
  };
  CHECK(top_fraction(img.v) > top_fraction(noise));
}

TEST_CASE("predict_residual: t = 0 or eta = 0 returns r0 unchanged") {
  const Generator g = tiny_generator(8, 8, 1, 26);
  const JjtOperator op(g, g.theta0());
  const SpectralBasis basis = lanczos_topk(op, 8, 16);
  const auto r0 = dip::testing::random_vector(basis.n, 7);
  CHECK(predict_residual(basis, r0, 0.5, 0) == r0);
  CHECK(predict_residual(basis, r0, 0.0, 50) == r0);
}

TEST_CASE("predict_residual reproduces the exact linear recursion") {
  const Generator g = tiny_generator(4, 4, 3, 27, {3}, 2);  // n = 48
  const JjtOperator op(g, g.theta0());
  const int n = op.dim();
  const SpectralBasis basis = lanczos_topk(op, n, 17);  // complete basis

  const auto r0 = dip::testing::random_vector(n, 8);
  const double eta = 0.5 / basis.eigenvalues[0];
  const int t = 30;

  std::vector<double> r = r0, jr(n);
  for (int step = 0; step < t; ++step) {
    op.apply(r, jr);
    for (int i = 0; i < n; ++i) r[i] -= eta * jr[i];
  }
  const std::vector<double> pred = predict_residual(basis, r0, eta, t);
  double num = 0;
  for (int i = 0; i < n; ++i) num += (pred[i] - r[i]) * (pred[i] - r[i]);
  CHECK(std::sqrt(num) <= 1e-10 * norm2(r0));
}

TEST_CASE("bound_terms: t = 0 limits and signal-term decay") {
  const Generator g = tiny_generator(4, 4, 3, 28, {3}, 2);  // n = 48
  const JjtOperator op(g, g.theta0());
  const int n = op.dim();
  const SpectralBasis basis = lanczos_topk(op, n, 18);

  const Tensor scene = synthetic_test_image(4, 4, 3);
  const auto noise =
      add_gaussian_noise(std::vector<double>(n, 0.0), 25.0 / 255.0, 19);
  const double eta = 0.8 / basis.eigenvalues[0];
  const int p = 10;

  const BoundTerms at0 = bound_terms(basis, g, scene.v, noise, eta, 0, p);
  CHECK(at0.noise_term == 0.0);
  CHECK(at0.lhs <= at0.init_term + at0.signal_term + 1e-9);

  double prev = std::numeric_limits<double>::infinity();
  for (int t : {1, 3, 10, 40, 160}) {
    const BoundTerms bt = bound_terms(basis, g, scene.v, noise, eta, t, p);
    CHECK(bt.signal_term < prev);
    prev = bt.signal_term;
  }
}

TEST_CASE("bound_terms: the bound holds when the signal lies in the span") {
  const Generator g = tiny_generator(4, 4, 3, 29, {3}, 2);  // n = 48
  const JjtOperator op(g, g.theta0());
  const int n = op.dim();
  const SpectralBasis basis = lanczos_topk(op, n, 20);
  const int p = 10;

  // Build x_true inside span(u_1..u_p).
  const Tensor scene = synthetic_test_image(4, 4, 3);
  std::vector<double> x_true(n, 0.0);
  for (int i = 0; i < p; ++i) {
    const auto u = basis.vector(i);
    axpy(dot(u, scene.v), u, x_true);
  }
  const auto noise =
      add_gaussian_noise(std::vector<double>(n, 0.0), 25.0 / 255.0, 21);
  const double eta = 0.8 / basis.eigenvalues[0];

  for (int t : {0, 1, 5, 20, 100}) {
    const BoundTerms bt = bound_terms(basis, g, x_true, noise, eta, t, p);
    CHECK(bt.lhs <= bt.init_term + bt.signal_term + bt.noise_term + 1e-9);
  }
}

TEST_CASE("bound_terms refuses a partial spectrum") {
  const Generator g = tiny_generator(4, 4, 3, 30, {3}, 2);
  const JjtOperator op(g, g.theta0());
  const SpectralBasis partial = lanczos_topk(op, 8, 22);
  const std::vector<double> z(op.dim(), 0.0);
  CHECK_THROWS_AS(bound_terms(partial, g, z, z, 0.1, 1, 2),
                  std::invalid_argument);
}
