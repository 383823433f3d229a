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

#include <filesystem>
#include <fstream>
#include <limits>

#include "helpers.hpp"
#include "permglm/dataset_io.hpp"
#include "permglm/error.hpp"

using namespace permglm;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "permglm_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("csv grid round trip is exact") {
    auto ds = testing::random_dataset(5, 12, 3);
    ds.domain = Domain::grid(4, 3);
    const auto path = temp_path("grid.csv");
    save_dataset(ds, path, DataFormat::csv);
    const auto back = load_dataset(path, DataFormat::csv);
    CHECK(back.domain == ds.domain);
    CHECK(back.responses == ds.responses);
    CHECK(back.location_ids.size() == 12);
  }

  TEST_CASE("csv point domain round trip") {
    FunctionalDataset ds;
    ds.responses = testing::random_matrix(4, 3, 9);
    RowMatrix coords(2, 3);
    coords << 0.0, 0.5, 1.0, -1.0, 0.25, 1.0 / 3.0;
    ds.domain = Domain::points(coords);
    const auto path = temp_path("points.csv");
    save_dataset(ds, path, DataFormat::csv);
    const auto back = load_dataset(path, DataFormat::csv);
    CHECK(back.domain == ds.domain);
    CHECK(back.responses == ds.responses);
  }

  TEST_CASE("binary round trip is bit exact") {
    auto ds = testing::random_dataset(6, 7, 11);
    ds.responses(2, 3) = std::numeric_limits<double>::denorm_min();
    const auto path = temp_path("data.bin");
    CHECK(format_for_path(path) == DataFormat::binary);
    save_dataset(ds, path, DataFormat::binary);
    const auto back = load_dataset(path, DataFormat::binary);
    CHECK(back.responses == ds.responses);
    CHECK(back.domain == Domain::grid(7, 1));
  }

  TEST_CASE("truncated binary file reports the byte offset") {
    auto ds = testing::random_dataset(3, 2, 1);
    const auto path = temp_path("short.bin");
    save_dataset(ds, path, DataFormat::binary);
    fs::resize_file(path, 16 + 8 * 3);
    try {
      load_dataset(path, DataFormat::binary);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("byte offset 40") != std::string::npos);
    }
  }

  TEST_CASE("non-finite value names subject and location") {
    const auto path = temp_path("nan.csv");
    write_file(path, "# domain: grid 3 1\n1,2,3\n4,NaN,6\n7,8,9\n");
    try {
      load_dataset(path, DataFormat::csv);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()) == "non-finite value at subject 1, location 1");
    }
  }

  TEST_CASE("malformed csv reports the line") {
    const auto path = temp_path("bad.csv");
    write_file(path, "# domain: grid 2 1\n1,2\n3,x\n5,6\n");
    try {
      load_dataset(path, DataFormat::csv);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    write_file(path, "# domain: grid 2 1\n1,2\n3\n5,6\n");
    CHECK_THROWS_AS(load_dataset(path, DataFormat::csv), ParseError);
    write_file(path, "1,2\n3,4\n");
    CHECK_THROWS_AS(load_dataset(path, DataFormat::csv), ParseError);
  }

  TEST_CASE("domain size must match the columns") {
    const auto path = temp_path("shape.csv");
    write_file(path, "# domain: grid 2 2\n1,2,3\n4,5,6\n7,8,9\n");
    CHECK_THROWS_AS(load_dataset(path, DataFormat::csv), ValidationError);
  }

  TEST_CASE("too few subjects") {
    CHECK_THROWS_AS(make_grid_dataset(testing::random_matrix(2, 4, 1), 4, 1), ValidationError);
  }

  TEST_CASE("design round trip") {
    DesignSpec d;
    d.interest = testing::random_matrix(8, 2, 4);
    d.nuisance.resize(8, 2);
    d.nuisance.col(0).setOnes();
    d.nuisance.col(1) = testing::random_matrix(8, 1, 5);
    d.contrast.resize(1, 2);
    d.contrast << 1, -1;
    const auto path = temp_path("design.csv");
    save_design(d, path);
    const auto back = load_design(path);
    CHECK(back.interest == d.interest);
    CHECK(back.nuisance == d.nuisance);
    CHECK(back.contrast == d.contrast);
    CHECK_FALSE(back.allow_no_intercept);
  }

  TEST_CASE("design validation") {
    auto d = two_group_design(3, 3);
    CHECK_NOTHROW(d.validate());

    auto dup = d;
    dup.interest.resize(6, 2);
    dup.interest << 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1;
    dup.contrast = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(dup.validate(), RankError);

    auto collinear = d;
    collinear.interest = Eigen::MatrixXd::Ones(6, 1);
    CHECK_THROWS_AS(collinear.validate(), RankError);

    auto no_dof = two_group_design(1, 1);
    no_dof.interest.resize(2, 1);
    no_dof.interest << 0, 1;
    CHECK_THROWS_WITH_AS(no_dof.validate(), doctest::Contains("no residual degrees of freedom"),
                         ValidationError);

    auto no_intercept = d;
    no_intercept.nuisance.resize(6, 0);
    CHECK_THROWS_AS(no_intercept.validate(), ValidationError);
    no_intercept.allow_no_intercept = true;
    CHECK_NOTHROW(no_intercept.validate());

    auto bad_contrast = d;
    bad_contrast.contrast = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(bad_contrast.validate(), RankError);
  }

  TEST_CASE("design header with intercept=none") {
    const auto path = temp_path("noint.csv");
    write_file(path, "# design: k=1 l=0 t=1 intercept=none\n1\n0.5\n1.5\n-2\n0.25\n");
    const auto d = load_design(path);
    CHECK(d.l() == 0);
    CHECK(d.subjects() == 4);
    CHECK(d.allow_no_intercept);
  }

  TEST_CASE("numerical rank") {
    Eigen::MatrixXd m(3, 3);
    m << 1, 2, 3, 2, 4, 6, 0, 1, 1;
    CHECK(numerical_rank(m) == 2);
    CHECK(numerical_rank(Eigen::MatrixXd::Identity(4, 4)) == 4);
    CHECK(numerical_rank(Eigen::MatrixXd::Zero(2, 2)) == 0);
  }
}
