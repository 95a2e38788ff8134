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

#include <cmath>
#include <set>

#include "dip/measurement.hpp"
#include "test_support.hpp"

using namespace dip;

namespace {

/// Test-only diagonal operator A = diag(d); ||A^T A|| = max d_i^2.
class DiagOperator final : public LinearOperator {
 public:
  explicit DiagOperator(std::vector<double> d) : d_(std::move(d)) {}
  int rows() const override { return static_cast<int>(d_.size()); }
  int cols() const override { return static_cast<int>(d_.size()); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    for (std::size_t i = 0; i < d_.size(); ++i) y[i] = d_[i] * x[i];
  }
  void adjoint(std::span<const double> y, std::span<double> x) const override {
    apply(y, x);
  }

 private:
  std::vector<double> d_;
};

}  // namespace

TEST_CASE("make_mask_op: keep_fraction one is an identity-equivalent mask") {
  const MeasurementOp op = make_mask_op(16, 3, 1.0, 0);
  CHECK(op.rows() == 48);
  CHECK(op.cols() == 48);
  CHECK(op.kept_indices().size() == 48);
}

TEST_CASE("make_mask_op: half of the pixels, channels coupled") {
  const int n_pixels = 16384;
  const MeasurementOp op = make_mask_op(n_pixels, 3, 0.5, 9);
  CHECK(op.rows() == 8192 * 3);
  // all channels of a kept pixel are kept together
  std::set<int> kept(op.kept_indices().begin(), op.kept_indices().end());
  for (int idx : op.kept_indices()) {
    const int pixel = idx / 3;
    for (int ch = 0; ch < 3; ++ch) CHECK(kept.count(pixel * 3 + ch) == 1);
  }
}

TEST_CASE("make_mask_op: same seed gives the same mask") {
  const MeasurementOp a = make_mask_op(100, 1, 0.3, 1234);
  const MeasurementOp b = make_mask_op(100, 1, 0.3, 1234);
  CHECK(a.kept_indices() == b.kept_indices());
  const MeasurementOp c = make_mask_op(100, 1, 0.3, 1235);
  CHECK(a.kept_indices() != c.kept_indices());
}

TEST_CASE("make_mask_op: rejects bad keep fractions") {
  CHECK_THROWS_AS(make_mask_op(10, 1, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_mask_op(10, 1, 1.5, 0), std::invalid_argument);
}

TEST_CASE("mask: adjoint identity <Ax,y> == <x,A^T y>") {
  const MeasurementOp op = make_mask_op(40, 3, 0.4, 3);
  const auto x = dip::testing::random_vector(op.cols(), 10);
  const auto y = dip::testing::random_vector(op.rows(), 11);
  std::vector<double> ax(op.rows()), aty(op.cols());
  op.apply(x, ax);
  op.adjoint(y, aty);
  CHECK(std::abs(dot(ax, y) - dot(x, aty)) <= 1e-12);
}

TEST_CASE("mask: A^T A is the indicator of the kept set and A A^T = I") {
  const MeasurementOp op = make_mask_op(25, 1, 0.48, 7);
  std::set<int> kept(op.kept_indices().begin(), op.kept_indices().end());

  const auto x = dip::testing::random_vector(op.cols(), 21);
  std::vector<double> ax(op.rows()), atax(op.cols());
  op.apply(x, ax);
  op.adjoint(ax, atax);
  for (int i = 0; i < op.cols(); ++i)
    CHECK(atax[i] == (kept.count(i) ? x[i] : 0.0));

  const auto y = dip::testing::random_vector(op.rows(), 22);
  std::vector<double> aty(op.cols()), aaty(op.rows());
  op.adjoint(y, aty);
  op.apply(aty, aaty);
  CHECK(aaty == y);  // truncated permutation: A A^T = I exactly
}

TEST_CASE("identity op: apply and adjoint are copies") {
  const MeasurementOp op = MeasurementOp::identity(6);
  const auto x = dip::testing::random_vector(6, 2);
  std::vector<double> y(6), z(6);
  op.apply(x, y);
  CHECK(y == x);
  op.adjoint(y, z);
  CHECK(z == x);
}

TEST_CASE("operator_norm: identity and masks give exactly one") {
  CHECK(operator_norm(MeasurementOp::identity(10)) == 1.0);
  CHECK(operator_norm(make_mask_op(50, 3, 0.5, 1)) == 1.0);
}

TEST_CASE("operator_norm: diag(2,1) has gram norm 4 (dense oracle)") {
  // Enumeration oracle: ||A^T A|| of diag(d) is max_i d_i^2 = 4.
  const DiagOperator op({2.0, 1.0});
  CHECK(operator_norm(op) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("add_gaussian_noise: sigma zero returns the input") {
  const auto v = dip::testing::random_vector(32, 5);
  CHECK(add_gaussian_noise(v, 0.0, 99) == v);
}

TEST_CASE("add_gaussian_noise: reproducible and seed-sensitive") {
  const std::vector<double> v(64, 0.0);
  const auto a = add_gaussian_noise(v, 1.0, 4);
  const auto b = add_gaussian_noise(v, 1.0, 4);
  const auto c = add_gaussian_noise(v, 1.0, 5);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("add_gaussian_noise: sample mean of 1e6 draws is near zero") {
  const std::vector<double> v(1000000, 0.0);
  const double sigma = 0.7;
  const auto noisy = add_gaussian_noise(v, sigma, 31337);
  double mean = 0.0;
  for (double x : noisy) mean += x;
  mean /= static_cast<double>(noisy.size());
  CHECK(std::abs(mean) <= 4.0 * sigma / 1e3);  // 4 standard errors
}

TEST_CASE("paper noise level converts to about 0.0392 in [0,1] scale") {
  CHECK(10.0 / 255.0 == doctest::Approx(0.0392).epsilon(1e-3));
}
