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

#include "permglm/synthetic.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <tuple>

#include "permglm/error.hpp"

namespace permglm {
namespace {

double signed_root5(double v) { return std::copysign(std::pow(std::fabs(v), 0.2), v); }

}  // namespace

std::string_view to_string(ErrorKind kind) {
  static constexpr std::string_view names[] = {"a", "b", "c", "d", "e", "f", "g"};
  return names[static_cast<int>(kind)];
}

std::string_view to_string(Model model) {
  switch (model) {
    case Model::M0: return "M0";
    case Model::M1: return "M1";
    case Model::M1prime: return "M1prime";
    case Model::M2: return "M2";
  }
  return "?";
}

ErrorKind parse_error_kind(std::string_view name) {
  if (name.size() == 1 && name[0] >= 'a' && name[0] <= 'g')
    return static_cast<ErrorKind>(name[0] - 'a');
  throw ConfigError("unknown error kind '" + std::string(name) + "' (expected a..g)");
}

Model parse_model(std::string_view name) {
  if (name == "M0") return Model::M0;
  if (name == "M1") return Model::M1;
  if (name == "M1prime" || name == "M1'" || name == "M1p") return Model::M1prime;
  if (name == "M2") return Model::M2;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected M0, M1, M1prime, M2)");
}

Grid::Grid(std::size_t w, std::size_t h) : width(w), height(h) {
  if (w < 2 || h < 2) throw ConfigError("grid must be at least 2 x 2");
  x.resize(w * h);
  y.resize(w * h);
  radius.resize(w * h);
  for (std::size_t iy = 0; iy < h; ++iy)
    for (std::size_t ix = 0; ix < w; ++ix) {
      const std::size_t id = iy * w + ix;
      x[id] = -1.0 + 2.0 * static_cast<double>(ix) / static_cast<double>(w - 1);
      y[id] = -1.0 + 2.0 * static_cast<double>(iy) / static_cast<double>(h - 1);
      radius[id] = std::hypot(x[id], y[id]);
    }
}

std::shared_ptr<const GrfFactor> GrfFactor::get(const Grid& grid, double rho,
                                                CorrelationForm form) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (grid.width > kMaxDenseGridSide || grid.height > kMaxDenseGridSide)
    throw ConfigError("dense GRF sampling supports grids up to 64 x 64");
  using Key = std::tuple<std::size_t, std::size_t, double, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const GrfFactor>> cache;
  const Key key{grid.width, grid.height, rho, static_cast<int>(form)};
  std::lock_guard lock(mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = 0; v <= u; ++v) {
      const double d = std::hypot(grid.x[u] - grid.x[v], grid.y[u] - grid.y[v]);
      const double c = form == CorrelationForm::scale ? std::exp(-d / rho) : std::exp(-d * rho);
      cov(u, v) = c;
      cov(v, u) = c;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  bool jittered = false;
  if (llt.info() != Eigen::Success) {
    std::cerr << "warning: covariance factorization failed, adding 1e-10 to the diagonal\n";
    cov.diagonal().array() += 1e-10;
    llt.compute(cov);
    jittered = true;
    if (llt.info() != Eigen::Success) throw Error("covariance factorization failed");
  }
  auto factor = std::make_shared<const GrfFactor>(Eigen::MatrixXd(llt.matrixL()), jittered);
  cache.emplace(key, factor);
  return factor;
}

RowMatrix GrfFactor::sample(CounterRng& rng, std::size_t count, double sigma) const {
  const auto n = lower_.rows();
  std::normal_distribution<double> normal;
  RowMatrix z(static_cast<Eigen::Index>(count), n);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index r = 0; r < n; ++r) z(i, r) = normal(rng);
  RowMatrix fields = z * lower_.transpose();
  fields *= sigma;
  return fields;
}

std::vector<double> sample_grf(const Grid& grid, double rho, double sigma, std::uint64_t seed,
                               CorrelationForm form) {
  CounterRng rng(seed, 0);
  const RowMatrix f = GrfFactor::get(grid, rho, form)->sample(rng, 1, sigma);
  return {f.data(), f.data() + f.size()};
}

RowMatrix sample_error_fields(ErrorKind kind, const Grid& grid, double sigma, std::size_t count,
                              std::uint64_t seed, double base_rho, CorrelationForm form) {
  if (kind == ErrorKind::f || kind == ErrorKind::g) {
    CounterRng inner_rng(seed, 0), outer_rng(seed, 1);
    const RowMatrix inner = GrfFactor::get(grid, 0.05, form)->sample(inner_rng, count, sigma);
    const RowMatrix outer = GrfFactor::get(grid, 0.3, form)->sample(outer_rng, count, sigma);
    RowMatrix out(inner.rows(), inner.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index r = 0; r < out.cols(); ++r) {
        const bool centre = grid.radius[static_cast<std::size_t>(r)] <= 0.5;
        const double g = centre ? inner(i, r) : outer(i, r);
        out(i, r) = kind == ErrorKind::f ? g : 0.5 * signed_root5(g);
      }
    return out;
  }
  CounterRng rng(seed, 0);
  RowMatrix out = GrfFactor::get(grid, base_rho, form)->sample(rng, count, sigma);
  if (kind == ErrorKind::a) return out;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index r = 0; r < out.cols(); ++r) {
      const double g = out(i, r);
      const double norm = grid.radius[static_cast<std::size_t>(r)];
      double e = g;
      switch (kind) {
        case ErrorKind::b: e = std::exp(g); break;
        case ErrorKind::c:
          e = 0.25 * std::copysign(std::pow(std::fabs(g), 1.0 / (2.0 * norm + 1.0)), g);
          break;
        case ErrorKind::d: e = norm > 0.5 ? 0.5 * signed_root5(g) : g; break;
        case ErrorKind::e: e = norm <= 0.5 ? std::exp(3.0 * g) / 8.0 : (g + 1.0) / 8.0; break;
        default: break;
      }
      out(i, r) = e;
    }
  return out;
}

std::vector<double> sample_error(ErrorKind kind, const Grid& grid, double sigma,
                                 std::uint64_t seed, double base_rho, CorrelationForm form) {
  const RowMatrix f = sample_error_fields(kind, grid, sigma, 1, seed, base_rho, form);
  return {f.data(), f.data() + f.size()};
}

void FieldSpec::validate() const {
  if (width < 2 || height < 2) throw ConfigError("grid must be at least 2 x 2");
  if (width > kMaxDenseGridSide || height > kMaxDenseGridSide)
    throw ConfigError("grid sides above 64 are not supported");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (subjects_per_group < 2) throw ConfigError("need at least 2 subjects per group");
}

double signal_amplitude(Model model, double radius) {
  switch (model) {
    case Model::M0: return 0.0;
    case Model::M1:
    case Model::M2: return std::exp(-10.0 * radius);
    case Model::M1prime: return std::exp(-200.0 * radius);
  }
  return 0.0;
}

std::pair<FunctionalDataset, DesignSpec> simulate_dataset(const FieldSpec& spec) {
  spec.validate();
  const Grid grid(spec.width, spec.height);
  const std::size_t s = 2 * spec.subjects_per_group;
  RowMatrix y = sample_error_fields(spec.error, grid, spec.sigma, s, mix_seed(spec.seed, 0),
                                    spec.rho, spec.form);
  std::vector<double> z(s, 0.0);
  if (spec.model == Model::M2) {
    CounterRng rng(mix_seed(spec.seed, 1), 0);
    for (auto& v : z) v = rng.uniform();
  }
  if (spec.model != Model::M0)
    for (std::size_t i = 0; i < s; ++i) {
      const double g = i < spec.subjects_per_group ? 1.0 : 2.0;
      const double factor = g + z[i];
      for (std::size_t r = 0; r < grid.size(); ++r)
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) +=
            signal_amplitude(spec.model, grid.radius[r]) * factor;
    }
  DesignSpec design = two_group_design(spec.subjects_per_group, spec.subjects_per_group);
  if (spec.model == Model::M2) {
    design.nuisance.conservativeResize(Eigen::NoChange, 2);
    for (std::size_t i = 0; i < s; ++i) design.nuisance(static_cast<Eigen::Index>(i), 1) = z[i];
  }
  auto dataset = make_grid_dataset(std::move(y), spec.width, spec.height);
  return {std::move(dataset), std::move(design)};
}

}  // namespace permglm
