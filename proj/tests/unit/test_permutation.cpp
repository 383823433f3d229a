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

#include <algorithm>
#include <map>
#include <numeric>

#include "helpers.hpp"
#include "permglm/error.hpp"
#include "permglm/glm.hpp"
#include "permglm/permutation.hpp"
#include "permglm/philox.hpp"

using namespace permglm;

TEST_SUITE("permutation") {
  TEST_CASE("philox4x32-10 known answers") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("bounded draws stay in range and cover it") {
    CounterRng rng(5, 0);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
      const auto v = rng.bounded(7);
      REQUIRE(v < 7);
      ++hits[v];
    }
    for (int h : hits) CHECK(h > 850);
    for (int i = 0; i < 1000; ++i) {
      const double u = rng.uniform();
      CHECK((u >= 0.0 && u < 1.0));
    }
  }

  TEST_CASE("plans are deterministic") {
    const auto a = generate_plan(7, 3, 4, Scheme::raw);
    const auto b = generate_plan(7, 3, 4, Scheme::raw);
    CHECK(a.indices == b.indices);
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(generate_plan(8, 3, 4, Scheme::raw).fingerprint() != a.fingerprint());
    CHECK(generate_plan(7, 3, 4, Scheme::freedman_lane).fingerprint() != a.fingerprint());
  }

  TEST_CASE("every permutation is a bijection and never the identity") {
    const auto plan = generate_plan(11, 500, 5, Scheme::raw);
    std::vector<std::uint32_t> identity(5);
    std::iota(identity.begin(), identity.end(), 0u);
    for (std::size_t j = 1; j <= plan.count; ++j) {
      auto p = plan.permutation(j);
      std::vector<std::uint32_t> sorted(p.begin(), p.end());
      CHECK_FALSE(sorted == identity);
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == identity);
    }
  }

  TEST_CASE("a single permutation can be regenerated from the seed") {
    const auto plan = generate_plan(99, 40, 9, Scheme::raw);
    for (std::size_t j : {1u, 17u, 40u}) {
      const auto p = plan.permutation(j);
      CHECK(regenerate_permutation(99, j, 9) == std::vector<std::uint32_t>(p.begin(), p.end()));
    }
  }

  TEST_CASE("uniform over the symmetric group") {
    // 10000 draws on s = 3: each of the 6 permutations near 1/6.
    const auto plan = generate_plan(2024, 10000, 3, Scheme::raw, {.exclude_identity = false});
    std::map<std::vector<std::uint32_t>, int> freq;
    for (std::size_t j = 1; j <= plan.count; ++j) {
      const auto p = plan.permutation(j);
      ++freq[{p.begin(), p.end()}];
    }
    CHECK(freq.size() == 6);
    for (const auto& [perm, count] : freq) CHECK(std::abs(count / 10000.0 - 1.0 / 6.0) <= 0.02);

    const auto excl = generate_plan(2024, 10000, 3, Scheme::raw);
    std::map<std::vector<std::uint32_t>, int> freq_excl;
    for (std::size_t j = 1; j <= excl.count; ++j) {
      const auto p = excl.permutation(j);
      ++freq_excl[{p.begin(), p.end()}];
    }
    CHECK(freq_excl.size() == 5);
    for (const auto& [perm, count] : freq_excl) CHECK(std::abs(count / 10000.0 - 0.2) <= 0.02);
  }

  TEST_CASE("raw permutation of rows") {
    FunctionalDataset ds = make_grid_dataset(testing::random_matrix(3, 2, 1), 2, 1);
    auto plan = generate_plan(1, 1, 3, Scheme::raw);
    plan.indices = {1, 0, 2};
    const auto out = permute_raw(ds, plan, 1);
    CHECK(out.row(0) == ds.responses.row(1));
    CHECK(out.row(1) == ds.responses.row(0));
    CHECK(out.row(2) == ds.responses.row(2));
    CHECK(permute_raw(ds, plan, 0) == ds.responses);

    // involution applied twice
    FunctionalDataset once = ds;
    once.responses = out;
    CHECK(permute_raw(once, plan, 1) == ds.responses);
  }

  TEST_CASE("Freedman-Lane surrogates") {
    const std::size_t s = 8;
    const auto ds = testing::random_dataset(s, 6, 3);
    auto d = testing::continuous_design(s, 4);
    d.nuisance.conservativeResize(Eigen::NoChange, 2);
    d.nuisance.col(1) = testing::random_matrix(s, 1, 5);
    const auto plan = generate_plan(4, 5, s, Scheme::freedman_lane);

    const RowMatrix same = permute_freedman_lane(ds, d, plan, 0);
    CHECK((same - ds.responses).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::MatrixXd y = ds.responses;
    const Eigen::MatrixXd gamma = (d.nuisance.transpose() * d.nuisance).ldlt().solve(d.nuisance.transpose() * y);
    const Eigen::MatrixXd fitted = d.nuisance * gamma;
    const Eigen::MatrixXd resid = y - fitted;
    for (std::size_t j = 1; j <= 5; ++j) {
      const RowMatrix out = permute_freedman_lane(ds, d, plan, j);
      for (Eigen::Index r = 0; r < 6; ++r) {
        CHECK(out.col(r).mean() ==
              doctest::Approx(fitted.col(r).mean() + resid.col(r).mean()).epsilon(1e-10));
        Eigen::VectorXd a = out.col(r) - fitted.col(r);
        Eigen::VectorXd b = resid.col(r);
        std::sort(a.data(), a.data() + a.size());
        std::sort(b.data(), b.data() + b.size());
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }

  TEST_CASE("intercept-only Freedman-Lane gives raw statistics") {
    const std::size_t s = 10;
    const auto ds = testing::random_dataset(s, 15, 8);
    const auto d = testing::continuous_design(s, 9);
    const auto plan = generate_plan(6, 30, s, Scheme::raw);
    std::vector<RowMatrix> raw, fl;
    for (std::size_t j = 0; j <= 30; ++j) {
      raw.push_back(permute_raw(ds, plan, j));
      fl.push_back(permute_freedman_lane(ds, d, plan, j));
    }
    const auto a = stat_field(ds, d, raw);
    const auto b = stat_field(ds, d, fl);
    for (Eigen::Index j = 0; j < a.values.rows(); ++j)
      for (Eigen::Index r = 0; r < a.values.cols(); ++r)
        CHECK(b.values(j, r) == doctest::Approx(a.values(j, r)).epsilon(1e-9));
  }

  TEST_CASE("argument checks") {
    CHECK_THROWS_AS(generate_plan(1, 0, 4, Scheme::raw), ConfigError);
    CHECK_THROWS_AS(generate_plan(1, 3, 1, Scheme::raw), ConfigError);
    CHECK(parse_scheme("freedman-lane") == Scheme::freedman_lane);
    CHECK(parse_scheme("freedman_lane") == Scheme::freedman_lane);
    CHECK_THROWS_AS(parse_scheme("shuffle"), ConfigError);
  }
}
