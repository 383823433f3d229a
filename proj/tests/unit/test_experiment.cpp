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

#include "permglm/error.hpp"
#include "permglm/experiment.hpp"

using namespace permglm;

TEST_SUITE("experiment") {
  TEST_CASE("small run is deterministic and well formed") {
    FieldSpec spec;
    spec.width = spec.height = 7;
    spec.subjects_per_group = 5;
    spec.model = Model::M1;
    spec.sigma = 0.2;
    spec.seed = 4;
    const auto a = run_experiment(spec, 6, 19, 0.05, {MeasureKind::fmax, MeasureKind::erl});
    const auto b = run_experiment(spec, 6, 19, 0.05, {MeasureKind::fmax, MeasureKind::erl},
                                  {.threads = 3, .block_width = 4});
    CHECK(a.p_values == b.p_values);
    CHECK(a.rates.size() == 2);
    for (const auto& [kind, rate] : a.rates) {
      CHECK((rate >= 0.0 && rate <= 1.0));
      CHECK(a.p_values.at(kind).size() == 6);
      CHECK(a.ci_half_width.at(kind) == doctest::Approx(1.96 * std::sqrt(rate * (1 - rate) / 6)));
    }
  }

  TEST_CASE("config parsing") {
    const auto cfg = parse_experiment_config(
        R"({"name":"t","model":"M1","errors":["a","c"],"sigmas":[0.1,0.5],"replicates":60,)"
        R"("permutations":99,"methods":"fmax,erl"})");
    CHECK(cfg.errors.size() == 2);
    CHECK(cfg.methods.size() == 2);
    CHECK(cfg.permutations == 99);
    CHECK_THROWS_AS(parse_experiment_config(R"({"errors":["h"]})"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"replicates":10})"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"colour":"red"})"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
  }

  TEST_CASE("presets") {
    const auto p = experiment_preset("table-M1c");
    CHECK(p.model == Model::M1);
    CHECK(p.errors == std::vector<ErrorKind>{ErrorKind::c});
    CHECK(p.sigmas.size() == 7);
    CHECK(experiment_preset("table-M0a").sigmas == std::vector<double>{0.1});
    CHECK(experiment_preset("table-M1primec").model == Model::M1prime);
    CHECK_THROWS_AS(experiment_preset("table-M1h"), ConfigError);
    CHECK_THROWS_AS(experiment_preset("bogus"), ConfigError);
  }

  TEST_CASE("rate table layout") {
    ExperimentReport r;
    r.spec.sigma = 0.1;
    r.methods = {MeasureKind::fmax, MeasureKind::pmin, MeasureKind::erl, MeasureKind::cont,
                 MeasureKind::area};
    for (auto k : r.methods) r.rates[k] = 0.05;
    const auto table = format_rate_table({r});
    CHECK(table == "method,0.1\nfmax,0.05\npmin,0.05\nerl,0.05\ncont,0.05\narea,0.05\n");
  }
}
