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

#pragma once

// Synthetic imaging data: Gaussian random fields with exponential
// correlation on a grid over [-1, 1]^2, seven error structures and the
// M0 / M1 / M1' / M2 group models.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "permglm/dataset_io.hpp"
#include "permglm/philox.hpp"
#include "permglm/types.hpp"

namespace permglm {

enum class ErrorKind { a, b, c, d, e, f, g };
enum class Model { M0, M1, M1prime, M2 };

/// exp(-d / rho) (scale) or exp(-d * rho) (rate).
enum class CorrelationForm { scale, rate };

std::string_view to_string(ErrorKind kind);
std::string_view to_string(Model model);
ErrorKind parse_error_kind(std::string_view name);
Model parse_model(std::string_view name);

/// Pixel centres of a W x H lattice spanning [-1, 1]^2, endpoints included.
struct Grid {
  Grid(std::size_t width, std::size_t height);

  std::size_t width;
  std::size_t height;
  std::vector<double> x;
  std::vector<double> y;
  /// Euclidean distance of each pixel to the origin.
  std::vector<double> radius;

  std::size_t size() const { return width * height; }
};

/// Largest grid the dense covariance factorization is used for.
inline constexpr std::size_t kMaxDenseGridSide = 64;

/// Cholesky factor of the exponential covariance on a grid (unit variance).
/// Factors are cached per (grid, rho, form) and shared between threads.
class GrfFactor {
 public:
  static std::shared_ptr<const GrfFactor> get(const Grid& grid, double rho,
                                              CorrelationForm form = CorrelationForm::scale);

  std::size_t size() const { return static_cast<std::size_t>(lower_.rows()); }
  /// True when the factorization needed diagonal jitter.
  bool jittered() const { return jittered_; }

  /// count fields of standard deviation sigma, returned as count x n. Field i
  /// uses normals i*n .. i*n+n-1 of `rng`.
  RowMatrix sample(CounterRng& rng, std::size_t count, double sigma) const;

  GrfFactor(Eigen::MatrixXd lower, bool jittered) : lower_(std::move(lower)), jittered_(jittered) {}

 private:
  Eigen::MatrixXd lower_;
  bool jittered_;
};

/// One GRF draw with covariance sigma^2 exp(-d(u, v) / rho).
std::vector<double> sample_grf(const Grid& grid, double rho, double sigma, std::uint64_t seed,
                               CorrelationForm form = CorrelationForm::scale);

/// count error fields of the given kind (count x n).
RowMatrix sample_error_fields(ErrorKind kind, const Grid& grid, double sigma, std::size_t count,
                              std::uint64_t seed, double base_rho = 0.15,
                              CorrelationForm form = CorrelationForm::scale);

/// A single error field; identical to row 0 of sample_error_fields.
std::vector<double> sample_error(ErrorKind kind, const Grid& grid, double sigma,
                                 std::uint64_t seed, double base_rho = 0.15,
                                 CorrelationForm form = CorrelationForm::scale);

struct FieldSpec {
  std::size_t width = 51;
  std::size_t height = 51;
  double rho = 0.15;
  double sigma = 0.1;
  ErrorKind error = ErrorKind::a;
  Model model = Model::M0;
  std::size_t subjects_per_group = 10;
  std::uint64_t seed = 1;
  CorrelationForm form = CorrelationForm::scale;

  void validate() const;
};

/// Signal amplitude exp(-k |r|) of the model (0 for M0).
double signal_amplitude(Model model, double radius);

/// Builds responses Y(r) = signal(r) * g + eps(r) (M2: signal * (g + z))
/// with g = 1 for the first group and 2 for the second, and the design
/// X = group indicator, Z = intercept (+ z for M2), C = [1].
std::pair<FunctionalDataset, DesignSpec> simulate_dataset(const FieldSpec& spec);

}  // namespace permglm
