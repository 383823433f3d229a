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

#include "permglm/rank_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "permglm/error.hpp"

namespace permglm {
namespace {

double boundary_exp(double numerator, double denominator) {
  if (!(denominator > 0.0)) return 0.0;  // argument taken as +inf
  return std::exp(-numerator / denominator);
}

/// Lexical comparison of two ascending rank vectors.
bool lexically_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

void ColumnRanker::sort_indices(std::span<const double> column) {
  order_.resize(column.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return column[a] < column[b]; });
}

void ColumnRanker::ordinary(std::span<const double> column, std::span<double> ranks) {
  rank(column, ranks, {});
}

void ColumnRanker::continuous(std::span<const double> column, std::span<double> ranks) {
  rank(column, {}, ranks);
}

void ColumnRanker::rank(std::span<const double> column, std::span<double> ordinary,
                        std::span<double> continuous) {
  const std::size_t size = column.size();
  if (!ordinary.empty() && ordinary.size() != size)
    throw ConsistencyError("ordinary rank output has the wrong length");
  if (!continuous.empty()) {
    if (continuous.size() != size)
      throw ConsistencyError("continuous rank output has the wrong length");
    if (size < 3) throw ConfigError("continuous ranks need J >= 2");
  }
  sort_indices(column);
  const std::size_t last = size - 1;
  auto sorted = [&](std::size_t pos) { return column[order_[pos]]; };
  std::size_t a = 0;
  while (a < size) {
    std::size_t b = a;
    while (b + 1 < size && sorted(b + 1) == sorted(a)) ++b;
    if (!ordinary.empty()) {
      const double r = ties_ == TiePolicy::mid ? 0.5 * static_cast<double>(a + b) + 1.0
                                               : static_cast<double>(a) + 1.0;
      for (std::size_t p = a; p <= b; ++p) ordinary[order_[p]] = r;
    }
    if (!continuous.empty()) {
      double c;
      if (b > a) {
        c = 0.5 * static_cast<double>(a + b) + 0.5;
      } else if (a == 0) {
        c = boundary_exp(sorted(1) - sorted(0), sorted(last) - sorted(1));
      } else if (a == last) {
        c = static_cast<double>(last) + (top_ == ContinuousTop::shifted ? 1.0 : 0.0) -
            boundary_exp(sorted(last) - sorted(last - 1), sorted(last - 1) - sorted(0));
      } else {
        c = static_cast<double>(a) +
            (sorted(a) - sorted(a - 1)) / (sorted(a + 1) - sorted(a - 1));
      }
      for (std::size_t p = a; p <= b; ++p) continuous[order_[p]] = c;
    }
    a = b + 1;
  }
}

std::vector<double> pointwise_ordinary_ranks(std::span<const double> column, TiePolicy ties) {
  std::vector<double> out(column.size());
  ColumnRanker(ties).ordinary(column, out);
  return out;
}

std::vector<double> pointwise_continuous_ranks(std::span<const double> column,
                                               ContinuousTop top) {
  std::vector<double> out(column.size());
  ColumnRanker(TiePolicy::mid, top).continuous(column, out);
  return out;
}

PointwiseRanks pointwise_ranks(const StatField& field, TiePolicy ties) {
  const auto rows = field.values.rows();
  const auto cols = field.values.cols();
  PointwiseRanks out;
  out.ordinary.resize(rows, cols);
  out.continuous.resize(rows, cols);
  ColumnRanker ranker(ties);
  std::vector<double> column(static_cast<std::size_t>(rows)), ord(column.size()),
      cont(column.size());
  for (Eigen::Index r = 0; r < cols; ++r) {
    for (Eigen::Index j = 0; j < rows; ++j) column[static_cast<std::size_t>(j)] = field.values(j, r);
    ranker.rank(column, ord, rows >= 3 ? std::span<double>(cont) : std::span<double>());
    for (Eigen::Index j = 0; j < rows; ++j) {
      out.ordinary(j, r) = ord[static_cast<std::size_t>(j)];
      out.continuous(j, r) = rows >= 3 ? cont[static_cast<std::size_t>(j)] : 0.0;
    }
  }
  return out;
}

double extreme_rank(const RowMatrix& ordinary, std::size_t j) {
  const double top = static_cast<double>(ordinary.rows()) + 1.0;  // J + 2
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < ordinary.cols(); ++r)
    best = std::min(best, top - ordinary(static_cast<Eigen::Index>(j), r));
  return best;
}

MeasureVector pmin_measure(const RowMatrix& ordinary) {
  const auto functions = static_cast<std::size_t>(ordinary.rows());
  MeasureVector m{MeasureKind::pmin, std::vector<double>(functions)};
  for (std::size_t j = 0; j < functions; ++j)
    m.values[j] = extreme_rank(ordinary, j) / static_cast<double>(functions);
  return m;
}

MeasureVector erl_measure(const RowMatrix& ordinary) {
  const auto functions = static_cast<std::size_t>(ordinary.rows());
  const auto n = static_cast<std::size_t>(ordinary.cols());
  const double top = static_cast<double>(functions) + 1.0;
  std::vector<double> sorted(functions * n);
  for (std::size_t j = 0; j < functions; ++j) {
    double* row = sorted.data() + j * n;
    for (std::size_t r = 0; r < n; ++r)
      row[r] = top - ordinary(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r));
    std::sort(row, row + n);
  }
  auto vec = [&](std::size_t j) { return std::span<const double>(sorted.data() + j * n, n); };
  std::vector<std::size_t> order(functions);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lexically_less(vec(a), vec(b)); });
  MeasureVector m{MeasureKind::erl, std::vector<double>(functions)};
  std::size_t group_start = 0;
  for (std::size_t p = 0; p < functions; ++p) {
    if (p > 0 && lexically_less(vec(order[p - 1]), vec(order[p]))) group_start = p;
    m.values[order[p]] = static_cast<double>(group_start) / static_cast<double>(functions);
  }
  return m;
}

MeasureVector cont_measure(const RowMatrix& continuous) {
  const auto functions = static_cast<std::size_t>(continuous.rows());
  const double top = static_cast<double>(functions);  // J + 1
  MeasureVector m{MeasureKind::cont, std::vector<double>(functions)};
  for (std::size_t j = 0; j < functions; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < continuous.cols(); ++r)
      best = std::min(best, top - continuous(static_cast<Eigen::Index>(j), r));
    m.values[j] = best / top;
  }
  return m;
}

MeasureVector area_measure(const RowMatrix& continuous) {
  const auto functions = static_cast<std::size_t>(continuous.rows());
  const auto n = continuous.cols();
  const double top = static_cast<double>(functions);
  MeasureVector m{MeasureKind::area, std::vector<double>(functions)};
  for (std::size_t j = 0; j < functions; ++j) {
    const auto row = continuous.row(static_cast<Eigen::Index>(j));
    double extreme = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < n; ++r) extreme = std::min(extreme, std::ceil(top - row(r)));
    double excess = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double c = top - row(r);
      if (c < extreme) excess += extreme - c;
    }
    m.values[j] = (extreme - excess / static_cast<double>(n)) / top;
  }
  return m;
}

MeasureVector fmax_measure(const RowMatrix& statistics) {
  MeasureVector m{MeasureKind::fmax, std::vector<double>(static_cast<std::size_t>(statistics.rows()))};
  for (Eigen::Index j = 0; j < statistics.rows(); ++j)
    m.values[static_cast<std::size_t>(j)] = statistics.row(j).maxCoeff();
  return m;
}

std::size_t extreme_count(const MeasureVector& measure) {
  if (measure.values.empty()) throw ConsistencyError("empty measure vector");
  const double observed = measure.values.front();
  const bool larger = larger_is_extreme(measure.kind);
  return static_cast<std::size_t>(std::count_if(
      measure.values.begin(), measure.values.end(),
      [&](double v) { return larger ? v >= observed : v <= observed; }));
}

double monte_carlo_pvalue(const MeasureVector& measure) {
  return static_cast<double>(extreme_count(measure)) /
         static_cast<double>(measure.functions());
}

std::map<MeasureKind, MeasureVector> naive_measures(const StatField& field, MeasureSet kinds,
                                                    TiePolicy ties) {
  std::map<MeasureKind, MeasureVector> out;
  if (kinds.contains(MeasureKind::fmax)) out[MeasureKind::fmax] = fmax_measure(field.values);
  if (kinds.needs_ordinary_ranks() || kinds.needs_continuous_ranks()) {
    const auto ranks = pointwise_ranks(field, ties);
    if (kinds.contains(MeasureKind::pmin)) out[MeasureKind::pmin] = pmin_measure(ranks.ordinary);
    if (kinds.contains(MeasureKind::erl)) out[MeasureKind::erl] = erl_measure(ranks.ordinary);
    if (kinds.contains(MeasureKind::cont)) out[MeasureKind::cont] = cont_measure(ranks.continuous);
    if (kinds.contains(MeasureKind::area)) out[MeasureKind::area] = area_measure(ranks.continuous);
  }
  return out;
}

}  // namespace permglm
