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

// Per-location least-squares kernels. Every variant walks the same loop
// order; the scalar reference uses separate multiply and add, the vector
// variants use fused multiply-add. Each lane of a vector variant is bit-equal
// to the fused scalar lane in kernel_lane.hpp, so results never depend on
// the block width or on where a location falls inside a block.

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace permglm::simd {

/// Orthonormal basis of a design's column space, row-major subjects x columns.
/// For F kernels the last `contrast` columns span the tested directions and
/// the leading columns span the reduced (null) model.
struct ProjectionBasis {
  std::size_t subjects = 0;
  std::size_t columns = 0;
  std::size_t contrast = 0;
  std::vector<double> q;

  double residual_dof() const { return static_cast<double>(subjects - columns); }
};

/// Relative threshold (on squared norms) below which a sum of squares counts
/// as exactly zero.
inline constexpr double kZeroSumOfSquares = 1e-24;

/// Stand-in for F = c/0 (perfect fit with a nonzero effect).
inline constexpr double kDegenerateStatistic = std::numeric_limits<double>::max();

/// rows[i] points at `width` consecutive responses of subject i. Writes the
/// F statistic of each of the `width` locations to out.
using FStatBlockFn = void (*)(const ProjectionBasis& basis, const double* const* rows,
                              std::size_t width, double* out);

/// Writes residuals y - Q Q^T y for each location; out is subjects x width,
/// row-major.
using ResidualizeBlockFn = void (*)(const ProjectionBasis& basis, const double* const* rows,
                                    std::size_t width, double* out);

struct KernelTable {
  std::string_view name;
  FStatBlockFn f_stat_block;
  ResidualizeBlockFn residualize_block;
};

enum class Backend { scalar, avx2, neon };

std::string_view to_string(Backend backend);
std::optional<Backend> parse_backend(std::string_view name);

/// True when the variant was compiled in and the running CPU supports it.
bool backend_available(Backend backend);

/// Best available backend, unless overridden by PERMGLM_SIMD=scalar|avx2|neon.
Backend default_backend();

/// The kernel table currently used by the library.
const KernelTable& active_kernels();
Backend active_backend();

/// Switches the process-wide backend. Throws ConfigError when unavailable.
void set_backend(Backend backend);

const KernelTable& kernels_for(Backend backend);

namespace detail {
const KernelTable& scalar_table();
#if defined(PERMGLM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(PERMGLM_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

}  // namespace permglm::simd
