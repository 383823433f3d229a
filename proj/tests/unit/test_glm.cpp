// Copyright 2026 The permglm Authors
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
#include <random>

#include "helpers.hpp"
#include "permglm/error.hpp"
#include "permglm/glm.hpp"

using namespace permglm;

namespace {

double extra_ss_f(const Eigen::VectorXd& y, const Eigen::MatrixXd& full,
                  const Eigen::MatrixXd& reduced, double t) {
  // normal equations on both models
  auto rss = [&](const Eigen::MatrixXd& x) {
    const Eigen::VectorXd b = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    return (y - x * b).squaredNorm();
  };
  const double rf = rss(full);
  const double dof = static_cast<double>(full.rows() - full.cols());
  return ((rss(reduced) - rf) / t) / (rf / dof);
}

}  // namespace

TEST_SUITE("glm") {
  TEST_CASE("mean fit") {
    const std::vector<double> y{1, 2, 3};
    const auto fit = fit_ols(y, Eigen::MatrixXd::Ones(3, 1));
    CHECK(fit.coefficients(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.rss == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.dof_residual == 2);
  }

  TEST_CASE("exact fit has zero rss") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 0, 1, 1, 1, 2, 1, 3;
    const std::vector<double> y{1, 3, 5, 7};
    const auto fit = fit_ols(y, x);
    CHECK(fit.rss <= 1e-12 * 84.0);
  }

  TEST_CASE("coefficients match normal equations") {
    const Eigen::MatrixXd x = testing::random_matrix(10, 3, 17);
    const RowMatrix yr = testing::random_matrix(10, 1, 18);
    const Eigen::VectorXd y = yr.col(0);
    const auto fit = fit_ols({y.data(), 10}, x);
    const Eigen::VectorXd oracle = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    for (int i = 0; i < 3; ++i)
      CHECK(fit.coefficients(i) == doctest::Approx(oracle(i)).epsilon(1e-9));
    const Eigen::VectorXd inner = x.transpose() * fit.residuals;
    for (int i = 0; i < 3; ++i)
      CHECK(std::fabs(inner(i)) <= 1e-8 * x.col(i).norm() * fit.residuals.norm());
    CHECK(fit.rss == doctest::Approx(fit.residuals.squaredNorm()).epsilon(1e-10));
  }

  TEST_CASE("rank deficient fit throws") {
    Eigen::MatrixXd x(5, 2);
    x.col(0).setOnes();
    x.col(1).setConstant(3.0);
    const std::vector<double> y{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(fit_ols(y, x), RankError);
    CHECK_THROWS_AS(fit_ols(std::vector<double>{1, 2}, Eigen::MatrixXd::Ones(2, 2)),
                    ValidationError);
  }

  TEST_CASE("one-way anova example") {
    const auto design = two_group_design(2, 2);
    const std::vector<double> y{0, 1, 1, 2};
    const auto f = f_statistic(y, design);
    CHECK(f.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(f.degenerate);
    CHECK(ContrastModel(design).residual_dof() == 2);
  }

  TEST_CASE("constant response gives zero") {
    const auto f = f_statistic(std::vector<double>{3, 3, 3, 3}, two_group_design(2, 2));
    CHECK(f.value == 0.0);
  }

  TEST_CASE("perfect separation is capped") {
    const auto f = f_statistic(std::vector<double>{0, 0, 1, 1}, two_group_design(2, 2));
    CHECK(f.degenerate);
    CHECK(f.value == simd::kDegenerateStatistic);
  }

  TEST_CASE("general contrast matches extra sum of squares") {
    const std::size_t s = 14;
    DesignSpec d;
    d.interest = testing::random_matrix(s, 3, 5);
    d.nuisance.resize(s, 2);
    d.nuisance.col(0).setOnes();
    d.nuisance.col(1) = testing::random_matrix(s, 1, 6);
    d.contrast.resize(2, 3);
    d.contrast << 1, -1, 0, 0, 1, -1;
    const RowMatrix yr = testing::random_matrix(s, 1, 7);
    const Eigen::VectorXd y = yr.col(0);

    Eigen::MatrixXd full(s, 5);
    full << d.interest, d.nuisance;
    // H0: b0 = b1 = b2, so the reduced model keeps X * (1,1,1)' and Z
    Eigen::MatrixXd reduced(s, 3);
    reduced << d.interest.rowwise().sum(), d.nuisance;
    const double oracle = extra_ss_f(y, full, reduced, 2.0);
    CHECK(f_statistic({y.data(), s}, d).value == doctest::Approx(oracle).epsilon(1e-10));
  }

  TEST_CASE("invariant to nuisance shifts and rescaling") {
    const std::size_t s = 12;
    auto d = testing::continuous_design(s, 3);
    d.nuisance.conservativeResize(Eigen::NoChange, 2);
    d.nuisance.col(1) = testing::random_matrix(s, 1, 8);
    const RowMatrix yr = testing::random_matrix(s, 1, 9);
    Eigen::VectorXd y = yr.col(0);
    const double base = f_statistic({y.data(), s}, d).value;
    Eigen::VectorXd shifted = y + 3.0 * d.nuisance.col(0) - 2.0 * d.nuisance.col(1);
    CHECK(f_statistic({shifted.data(), s}, d).value == doctest::Approx(base).epsilon(1e-8));
    for (double c : {0.1, 10.0}) {
      Eigen::VectorXd scaled = c * y;
      CHECK(f_statistic({scaled.data(), s}, d).value == doctest::Approx(base).epsilon(1e-8));
    }
  }

  TEST_CASE("null F has the F-distribution mean") {
    const std::size_t s = 12;
    const auto d = two_group_design(6, 6);
    const ContrastModel model(d);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal;
    std::vector<double> y(s);
    double sum = 0.0;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
      for (auto& v : y) v = normal(rng);
      sum += model.f_statistic(y).value;
    }
    const double dof2 = 10.0;
    CHECK(sum / draws == doctest::Approx(dof2 / (dof2 - 2.0)).epsilon(0.10));
  }

  TEST_CASE("stat field equals the per-column loop bit for bit") {
    const auto ds = testing::random_dataset(5, 50, 21);
    DesignSpec d = testing::continuous_design(5, 22);
    const auto plan = generate_plan(3, 20, 5, Scheme::raw);
    const auto field = stat_field(ds, d, plan, {.block_width = 7, .kernels = nullptr});
    const ContrastModel model(d);
    std::vector<double> y(5);
    for (std::size_t j = 0; j <= 20; ++j) {
      const RowMatrix perm = permute_raw(ds, plan, j);
      for (Eigen::Index r = 0; r < 50; ++r) {
        for (Eigen::Index i = 0; i < 5; ++i) y[static_cast<std::size_t>(i)] = perm(i, r);
        CHECK(field.values(static_cast<Eigen::Index>(j), r) == model.f_statistic(y).value);
      }
    }
  }

  TEST_CASE("identity relabeling reproduces row 0") {
    const auto ds = testing::random_dataset(6, 9, 2);
    const auto d = testing::continuous_design(6, 3);
    auto plan = generate_plan(1, 2, 6, Scheme::raw);
    for (std::size_t i = 0; i < 6; ++i) plan.indices[i] = static_cast<std::uint32_t>(i);
    const auto field = stat_field(ds, d, plan);
    CHECK(field.values.row(1) == field.values.row(0));
  }

  TEST_CASE("field from explicit matrices") {
    const auto ds = testing::random_dataset(6, 9, 4);
    const auto d = testing::continuous_design(6, 5);
    const std::vector<RowMatrix> only{ds.responses};
    const auto field = stat_field(ds, d, only);
    CHECK(field.functions() == 1);
    const ContrastModel model(d);
    std::vector<double> y(6);
    for (Eigen::Index r = 0; r < 9; ++r) {
      for (Eigen::Index i = 0; i < 6; ++i) y[static_cast<std::size_t>(i)] = ds.responses(i, r);
      CHECK(field.values(0, r) == model.f_statistic(y).value);
    }
  }

  TEST_CASE("Freedman-Lane block path matches explicit surrogates") {
    const std::size_t s = 9;
    const auto ds = testing::random_dataset(s, 23, 31);
    auto d = testing::continuous_design(s, 32);
    d.nuisance.conservativeResize(Eigen::NoChange, 2);
    d.nuisance.col(1) = testing::random_matrix(s, 1, 33);
    const auto plan = generate_plan(5, 15, s, Scheme::freedman_lane);
    const auto field = stat_field(ds, d, plan, {.block_width = 4, .kernels = nullptr});
    std::vector<RowMatrix> surrogates;
    for (std::size_t j = 0; j <= 15; ++j) surrogates.push_back(permute_freedman_lane(ds, d, plan, j));
    const auto oracle = stat_field(ds, d, surrogates);
    for (Eigen::Index j = 0; j < oracle.values.rows(); ++j)
      for (Eigen::Index r = 0; r < oracle.values.cols(); ++r)
        CHECK(field.values(j, r) == doctest::Approx(oracle.values(j, r)).epsilon(1e-9));
  }

  TEST_CASE("mismatched plan is rejected") {
    const auto ds = testing::random_dataset(6, 4, 1);
    const auto d = testing::continuous_design(6, 2);
    const auto plan = generate_plan(1, 3, 7, Scheme::raw);
    CHECK_THROWS_AS(stat_field(ds, d, plan), ConsistencyError);
  }
}
