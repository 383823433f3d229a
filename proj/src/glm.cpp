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

#include "permglm/glm.hpp"

#include <algorithm>
#include <string>

#include "permglm/error.hpp"

namespace permglm {
namespace {

simd::ProjectionBasis make_basis(const Eigen::MatrixXd& w, std::size_t contrast) {
  simd::ProjectionBasis basis;
  basis.subjects = static_cast<std::size_t>(w.rows());
  basis.columns = static_cast<std::size_t>(w.cols());
  basis.contrast = contrast;
  basis.q.assign(basis.subjects * basis.columns, 0.0);
  if (basis.columns == 0) return basis;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(w.rows(), w.cols());
  for (std::size_t i = 0; i < basis.subjects; ++i)
    for (std::size_t c = 0; c < basis.columns; ++c)
      basis.q[i * basis.columns + c] = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  return basis;
}

}  // namespace

FitResult fit_ols(std::span<const double> y, const Eigen::MatrixXd& design) {
  const auto s = static_cast<Eigen::Index>(y.size());
  if (design.rows() != s) throw ValidationError("response length does not match design rows");
  if (design.cols() >= s)
    throw ValidationError("no residual degrees of freedom: " + std::to_string(design.cols()) +
                          " columns for " + std::to_string(s) + " observations");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols())
    throw RankError("design is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(design.cols()) + ")");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), s);
  FitResult fit;
  fit.coefficients = qr.solve(yv);
  fit.residuals = yv - design * fit.coefficients;
  fit.rss = fit.residuals.squaredNorm();
  fit.dof_residual = static_cast<std::size_t>(s - design.cols());
  return fit;
}

ContrastModel::ContrastModel(const DesignSpec& design) {
  design.validate();
  const auto s = static_cast<Eigen::Index>(design.subjects());
  const auto k = static_cast<Eigen::Index>(design.k());
  const auto l = static_cast<Eigen::Index>(design.l());
  const auto t = static_cast<Eigen::Index>(design.t());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.contrast, Eigen::ComputeFullV);
  const Eigen::MatrixXd& v = svd.matrixV();
  design_.resize(s, l + k);
  if (l > 0) design_.leftCols(l) = design.nuisance;
  design_.middleCols(l, k - t) = design.interest * v.rightCols(k - t);
  design_.rightCols(t) = design.interest * v.leftCols(t);

  full_ = make_basis(design_, static_cast<std::size_t>(t));
  nuisance_ = make_basis(design.nuisance, 0);
}

FValue ContrastModel::f_statistic(std::span<const double> y,
                                  const simd::KernelTable& kernels) const {
  if (y.size() != subjects()) throw ValidationError("response length does not match design");
  std::vector<const double*> rows(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rows[i] = y.data() + i;
  FValue f;
  kernels.f_stat_block(full_, rows.data(), 1, &f.value);
  f.degenerate = f.value == simd::kDegenerateStatistic;
  return f;
}

FValue f_statistic(std::span<const double> y, const DesignSpec& design) {
  return ContrastModel(design).f_statistic(y);
}

StatEngine::StatEngine(const FunctionalDataset& dataset, const DesignSpec& design,
                       const PermutationPlan& plan, const simd::KernelTable& kernels)
    : responses_(&dataset.responses), plan_(&plan), model_(design), kernels_(&kernels) {
  if (design.subjects() != dataset.subjects())
    throw ConsistencyError("design has " + std::to_string(design.subjects()) +
                           " subjects but the dataset has " + std::to_string(dataset.subjects()));
  if (plan.subjects != dataset.subjects())
    throw ConsistencyError("permutation plan was drawn for " + std::to_string(plan.subjects) +
                           " subjects but the dataset has " + std::to_string(dataset.subjects()));
  if (plan.indices.size() != plan.count * plan.subjects)
    throw ConsistencyError("permutation plan is truncated");
}

void StatEngine::compute_block(std::size_t first, std::size_t width, std::span<double> out,
                               Workspace& ws) const {
  const std::size_t s = model_.subjects();
  const std::size_t n = locations();
  const std::size_t functions = plan_->functions();
  if (first + width > n || out.size() < functions * width)
    throw ConsistencyError("block out of range");
  ws.rows.resize(s);
  const double* data = responses_->data();
  const double* source = data + first;
  std::size_t stride = n;
  if (plan_->scheme == Scheme::freedman_lane) {
    ws.residuals.resize(s * width);
    for (std::size_t i = 0; i < s; ++i) ws.rows[i] = data + i * n + first;
    kernels_->residualize_block(model_.nuisance_basis(), ws.rows.data(), width,
                                ws.residuals.data());
    source = ws.residuals.data();
    stride = width;
  }
  for (std::size_t i = 0; i < s; ++i) ws.rows[i] = source + i * stride;
  kernels_->f_stat_block(model_.full_basis(), ws.rows.data(), width, out.data());
  for (std::size_t j = 1; j < functions; ++j) {
    const auto perm = plan_->permutation(j);
    for (std::size_t i = 0; i < s; ++i) ws.rows[i] = source + perm[i] * stride;
    kernels_->f_stat_block(model_.full_basis(), ws.rows.data(), width, out.data() + j * width);
  }
}

StatField stat_field(const FunctionalDataset& dataset, const DesignSpec& design,
                     const PermutationPlan& plan, const StatFieldOptions& options) {
  const auto& kernels = options.kernels ? *options.kernels : simd::active_kernels();
  StatEngine engine(dataset, design, plan, kernels);
  const std::size_t functions = engine.functions();
  const std::size_t n = engine.locations();
  const std::size_t bw = std::max<std::size_t>(1, options.block_width);
  StatField field;
  field.values.resize(static_cast<Eigen::Index>(functions), static_cast<Eigen::Index>(n));
  std::vector<double> block(functions * bw);
  StatEngine::Workspace ws;
  for (std::size_t first = 0; first < n; first += bw) {
    const std::size_t width = std::min(bw, n - first);
    engine.compute_block(first, width, block, ws);
    for (std::size_t j = 0; j < functions; ++j)
      for (std::size_t b = 0; b < width; ++b) {
        const double v = block[j * width + b];
        field.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(first + b)) = v;
        if (v == simd::kDegenerateStatistic) ++field.degenerate_count;
      }
  }
  return field;
}

StatField stat_field(const FunctionalDataset& dataset, const DesignSpec& design,
                     std::span<const RowMatrix> permuted_responses) {
  const ContrastModel model(design);
  const std::size_t s = dataset.subjects();
  const std::size_t n = dataset.locations();
  if (model.subjects() != s) throw ConsistencyError("design and dataset disagree on subjects");
  StatField field;
  field.values.resize(static_cast<Eigen::Index>(permuted_responses.size()),
                      static_cast<Eigen::Index>(n));
  std::vector<const double*> rows(s);
  const auto& kernels = simd::active_kernels();
  for (std::size_t j = 0; j < permuted_responses.size(); ++j) {
    const auto& y = permuted_responses[j];
    if (static_cast<std::size_t>(y.rows()) != s || static_cast<std::size_t>(y.cols()) != n)
      throw ConsistencyError("permuted response matrix has the wrong shape");
    for (std::size_t i = 0; i < s; ++i) rows[i] = y.row(static_cast<Eigen::Index>(i)).data();
    kernels.f_stat_block(model.full_basis(), rows.data(), n,
                         field.values.row(static_cast<Eigen::Index>(j)).data());
  }
  for (Eigen::Index j = 0; j < field.values.rows(); ++j)
    for (Eigen::Index r = 0; r < field.values.cols(); ++r)
      if (field.values(j, r) == simd::kDegenerateStatistic) ++field.degenerate_count;
  return field;
}

}  // namespace permglm
