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

#include "helpers.hpp"
#include "permglm/envelope.hpp"
#include "permglm/error.hpp"

using namespace permglm;

TEST_SUITE("envelope") {
  TEST_CASE("critical value example") {
    MeasureVector m{MeasureKind::pmin, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
    CHECK(critical_value(m, 0.1) == 2.0);
    const auto members = critical_members(m, 0.1);
    CHECK(members[0] == 0);
    for (std::size_t j = 1; j < 10; ++j) CHECK(members[j] == 1);
  }

  TEST_CASE("critical value with ties and tiny alpha") {
    MeasureVector tied{MeasureKind::erl, {0.5, 0.5, 0.5, 0.5}};
    CHECK(critical_value(tied, 0.3) == 0.5);
    for (auto v : critical_members(tied, 0.3)) CHECK(v == 1);

    MeasureVector m{MeasureKind::cont, {0.3, 0.1, 0.2}};
    CHECK_FALSE(alpha_resolvable(3, 0.2));
    CHECK(critical_value(m, 0.2) == 0.1);
    for (auto v : critical_members(m, 0.2)) CHECK(v == 1);
  }

  TEST_CASE("fmax orientation") {
    MeasureVector m{MeasureKind::fmax, {10, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    CHECK(critical_value(m, 0.1) == 9.0);
    const auto members = critical_members(m, 0.1);
    CHECK(members[0] == 0);
  }

  TEST_CASE("rejection threshold") {
    CHECK(rejection_threshold(1000, 0.05) == 50);
    CHECK(rejection_threshold(100, 0.07) == 7);
    CHECK(rejection_threshold(10, 0.1) == 1);
    CHECK_THROWS_AS(critical_value(MeasureVector{MeasureKind::erl, {1, 2}}, 1.5), ConfigError);
  }

  TEST_CASE("all functions critical gives the column max") {
    StatField f;
    f.values = testing::random_matrix(4, 5, 3);
    MeasureVector m{MeasureKind::erl, {0.5, 0.5, 0.5, 0.5}};
    const auto env = envelope_from_field(f, m, 0.05);
    for (Eigen::Index r = 0; r < 5; ++r)
      CHECK(env.upper[static_cast<std::size_t>(r)] == f.values.col(r).maxCoeff());
    CHECK(env.rejection_count() == 0);
  }

  TEST_CASE("dominant observed function is rejected everywhere") {
    StatField f;
    f.values = testing::random_matrix(20, 6, 5).cwiseAbs();
    f.values.row(0).array() += 50.0;
    const auto measures = naive_measures(f, MeasureSet::all());
    for (auto kind : kAllMeasures) {
      const auto env = envelope_from_field(f, measures.at(kind), 0.05);
      CHECK(env.p_value == doctest::Approx(0.05));
      CHECK(env.rejection_count() == 6);
    }
  }

  TEST_CASE("streaming envelopes equal the in-memory envelopes") {
    const auto ds = testing::random_dataset(10, 40, 7);
    const auto d = testing::continuous_design(10, 8);
    const auto plan = generate_plan(3, 99, 10, Scheme::raw);
    const auto field = stat_field(ds, d, plan);
    const auto naive = naive_measures(field, MeasureSet::all());
    std::vector<MeasureVector> ms;
    for (auto kind : kAllMeasures) ms.push_back(naive.at(kind));
    for (std::size_t threads : {1u, 2u}) {
      StreamingOptions opts;
      opts.threads = threads;
      opts.chunk_locations = 7;
      const auto envs = upper_envelopes(ds, d, plan, ms, 0.1, plan.fingerprint(), opts);
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const auto ref = envelope_from_field(field, ms[i], 0.1);
        CHECK(envs[i].upper == ref.upper);
        CHECK(envs[i].observed == ref.observed);
        CHECK(envs[i].rejected == ref.rejected);
        const auto audit = envelope_audit(envs[i], ms[i], &field);
        for (const auto& v : audit.violations) MESSAGE(to_string(ms[i].kind) << " @" << v.location << ": " << v.reason);
        CHECK(audit.ok());
      }
    }
  }

  TEST_CASE("plan mismatch is a consistency error") {
    const auto ds = testing::random_dataset(6, 5, 1);
    const auto d = testing::continuous_design(6, 2);
    const auto plan = generate_plan(3, 9, 6, Scheme::raw);
    const std::vector<MeasureVector> ms{MeasureVector{MeasureKind::fmax, std::vector<double>(10, 1.0)}};
    CHECK_THROWS_AS(upper_envelopes(ds, d, plan, ms, 0.1, plan.fingerprint() + 1),
                    ConsistencyError);
  }

  TEST_CASE("audit finds a corrupted bound") {
    const auto ds = testing::random_dataset(10, 30, 11);
    const auto d = testing::continuous_design(10, 12);
    const auto plan = generate_plan(5, 39, 10, Scheme::raw);
    const auto field = stat_field(ds, d, plan);
    const auto m = naive_measures(field, {MeasureKind::area}).at(MeasureKind::area);
    auto env = envelope_from_field(field, m, 0.05);
    CHECK(envelope_audit(env, m, &field).ok());
    env.upper[17] = env.observed[17] - 1.0;
    const auto report = envelope_audit(env, m, &field);
    REQUIRE_FALSE(report.ok());
    bool located = false;
    for (const auto& v : report.violations) located = located || v.location == 17;
    CHECK(located);
  }

  TEST_CASE("envelope shrinks as alpha grows") {
    const auto ds = testing::random_dataset(10, 25, 13);
    const auto d = testing::continuous_design(10, 14);
    const auto plan = generate_plan(6, 99, 10, Scheme::raw);
    const auto field = stat_field(ds, d, plan);
    const auto measures = naive_measures(field, MeasureSet::all());
    for (auto kind : kAllMeasures) {
      const auto tight = envelope_from_field(field, measures.at(kind), 0.01);
      const auto loose = envelope_from_field(field, measures.at(kind), 0.1);
      for (std::size_t r = 0; r < 25; ++r) CHECK(tight.upper[r] >= loose.upper[r]);
    }
  }
}
