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
#include <cstdlib>
#include <vector>

#include "helpers.hpp"
#include "permglm/glm.hpp"
#include "permglm/simd/kernel_lane.hpp"
#include "permglm/simd/kernels.hpp"

using namespace permglm;

namespace {

ContrastModel model_with(std::size_t s, std::size_t k, std::size_t l, std::size_t t,
                         std::uint64_t seed) {
  DesignSpec d;
  d.interest = testing::random_matrix(s, k, seed);
  d.nuisance = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(l));
  if (l > 1)
    d.nuisance.rightCols(static_cast<Eigen::Index>(l - 1)) = testing::random_matrix(s, l - 1, seed + 1);
  d.contrast = testing::random_matrix(t, k, seed + 2);
  return ContrastModel(d);
}

std::vector<simd::Backend> vector_backends() {
  std::vector<simd::Backend> out;
  for (auto b : {simd::Backend::avx2, simd::Backend::neon})
    if (simd::backend_available(b)) out.push_back(b);
  return out;
}

struct Shape {
  std::size_t s, k, l, t;
};

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("backend names") {
    CHECK(simd::parse_backend("scalar") == simd::Backend::scalar);
    CHECK(simd::parse_backend("avx2") == simd::Backend::avx2);
    CHECK_FALSE(simd::parse_backend("sse9").has_value());
    CHECK(simd::backend_available(simd::Backend::scalar));
    CHECK(simd::kernels_for(simd::Backend::scalar).name == "scalar");
  }

  TEST_CASE("vector lanes equal the fused scalar lane bit for bit") {
    const Shape shapes[] = {{6, 1, 1, 1}, {12, 2, 2, 1}, {20, 3, 2, 2}, {25, 4, 4, 3},
                            {30, 6, 4, 2}};
    for (auto backend : vector_backends()) {
      const auto& kernels = simd::kernels_for(backend);
      for (const auto& sh : shapes) {
        const auto model = model_with(sh.s, sh.k, sh.l, sh.t, sh.s);
        const auto& basis = model.full_basis();
        for (std::size_t width : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 16u}) {
          const RowMatrix y = testing::random_matrix(sh.s, width, width * 31 + sh.s);
          std::vector<const double*> rows(sh.s);
          for (std::size_t i = 0; i < sh.s; ++i) rows[i] = y.row(static_cast<Eigen::Index>(i)).data();
          std::vector<double> out(width), coef(basis.columns);
          kernels.f_stat_block(basis, rows.data(), width, out.data());
          for (std::size_t b = 0; b < width; ++b)
            CHECK(out[b] == simd::detail::lane_f_stat<true>(basis, rows.data(), b, coef.data()));

          std::vector<double> res(sh.s * width), lane(sh.s * width);
          kernels.residualize_block(model.nuisance_basis(), rows.data(), width, res.data());
          for (std::size_t b = 0; b < width; ++b)
            simd::detail::lane_residualize<true>(model.nuisance_basis(), rows.data(), b, width,
                                                 coef.data(), lane.data());
          CHECK(res == lane);
        }
      }
    }
  }

  TEST_CASE("scalar and vector kernels agree to rounding") {
    for (auto backend : vector_backends()) {
      const auto model = model_with(18, 3, 2, 2, 77);
      const RowMatrix y = testing::random_matrix(18, 37, 78);
      std::vector<const double*> rows(18);
      for (std::size_t i = 0; i < 18; ++i) rows[i] = y.row(static_cast<Eigen::Index>(i)).data();
      std::vector<double> a(37), b(37);
      simd::kernels_for(simd::Backend::scalar).f_stat_block(model.full_basis(), rows.data(), 37, a.data());
      simd::kernels_for(backend).f_stat_block(model.full_basis(), rows.data(), 37, b.data());
      for (std::size_t r = 0; r < 37; ++r) CHECK(b[r] == doctest::Approx(a[r]).epsilon(1e-12));
    }
  }

  TEST_CASE("stat field does not depend on block width") {
    const auto ds = testing::random_dataset(10, 41, 5);
    const auto d = testing::continuous_design(10, 6);
    for (auto scheme : {Scheme::raw, Scheme::freedman_lane}) {
      const auto plan = generate_plan(9, 12, 10, scheme);
      for (auto backend : {simd::Backend::scalar, simd::Backend::avx2, simd::Backend::neon}) {
        if (!simd::backend_available(backend)) continue;
        const auto* k = &simd::kernels_for(backend);
        const auto ref = stat_field(ds, d, plan, {.block_width = 1, .kernels = k});
        for (std::size_t bw : {3u, 4u, 16u, 64u})
          CHECK(stat_field(ds, d, plan, {.block_width = bw, .kernels = k}).values == ref.values);
      }
    }
  }

  TEST_CASE("degenerate handling is identical across backends") {
    const auto model = model_with(4, 1, 1, 1, 3);
    const double zeros[4] = {0, 0, 0, 0};
    const double* rows[4] = {zeros, zeros + 1, zeros + 2, zeros + 3};
    for (auto backend : {simd::Backend::scalar, simd::Backend::avx2, simd::Backend::neon}) {
      if (!simd::backend_available(backend)) continue;
      double out = -1.0;
      simd::kernels_for(backend).f_stat_block(model.full_basis(), rows, 1, &out);
      CHECK(out == 0.0);
    }
  }

  TEST_CASE("backend switch") {
    const auto before = simd::active_backend();
    simd::set_backend(simd::Backend::scalar);
    CHECK(simd::active_kernels().name == "scalar");
    simd::set_backend(before);
    if (!simd::backend_available(simd::Backend::neon))
      CHECK_THROWS(simd::set_backend(simd::Backend::neon));
  }
}
