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

#include "permglm/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "permglm/error.hpp"
#include "text_util.hpp"

namespace permglm {
namespace {

std::string position(std::size_t line) { return "line " + std::to_string(line); }

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<double> parse_row(std::string_view line, std::size_t line_no) {
  std::vector<double> row;
  for (auto field : text::split(line, ',')) {
    double v = 0.0;
    if (!text::parse_double(field, v))
      throw ParseError(position(line_no) + ": cannot parse '" + std::string(text::trim(field)) +
                       "' as a number");
    row.push_back(v);
  }
  return row;
}

void write_row(std::ostream& out, const double* values, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out << ',';
    out << text::format_double(values[i]);
  }
  out << '\n';
}

/// Expects `<key>=<value>` tokens.
std::size_t header_value(const std::vector<std::string>& tokens, const std::string& key,
                         std::size_t line_no) {
  for (const auto& tok : tokens) {
    if (tok.rfind(key + "=", 0) == 0) {
      std::size_t v = 0;
      if (!text::parse_size(std::string_view(tok).substr(key.size() + 1), v))
        throw ParseError(position(line_no) + ": bad value in '" + tok + "'");
      return v;
    }
  }
  throw ParseError(position(line_no) + ": design header lacks '" + key + "='");
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64_le(std::istream& in, std::size_t offset) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8))
    throw ParseError("byte offset " + std::to_string(offset) + ": unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

Domain Domain::grid(std::size_t width, std::size_t height) {
  Domain d;
  d.kind = Kind::grid;
  d.width = width;
  d.height = height;
  d.dimension = 2;
  return d;
}

Domain Domain::points(RowMatrix coordinates) {
  Domain d;
  d.kind = Kind::points;
  d.dimension = static_cast<std::size_t>(coordinates.rows());
  d.coordinates = std::move(coordinates);
  return d;
}

std::size_t Domain::size() const {
  return kind == Kind::grid ? width * height : static_cast<std::size_t>(coordinates.cols());
}

bool operator==(const Domain& a, const Domain& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Domain::Kind::grid) return a.width == b.width && a.height == b.height;
  return a.coordinates.rows() == b.coordinates.rows() &&
         a.coordinates.cols() == b.coordinates.cols() && a.coordinates == b.coordinates;
}

void FunctionalDataset::validate() const {
  const auto s = subjects();
  const auto n = locations();
  if (s < 3) throw ValidationError("dataset needs at least 3 subjects, got " + std::to_string(s));
  if (n < 1) throw ValidationError("dataset has no locations");
  if (domain.size() != n)
    throw ValidationError("domain describes " + std::to_string(domain.size()) +
                          " locations but the responses have " + std::to_string(n));
  if (!location_ids.empty() && location_ids.size() != n)
    throw ValidationError("location id count does not match the number of locations");
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t r = 0; r < n; ++r)
      if (!std::isfinite(responses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r))))
        throw ValidationError("non-finite value at subject " + std::to_string(i) + ", location " +
                              std::to_string(r));
  if (domain.kind == Domain::Kind::points && !domain.coordinates.allFinite())
    throw ValidationError("non-finite point coordinate");
}

FunctionalDataset make_grid_dataset(RowMatrix responses, std::size_t width, std::size_t height) {
  FunctionalDataset ds;
  ds.responses = std::move(responses);
  ds.domain = Domain::grid(width, height);
  ds.location_ids.resize(ds.locations());
  for (std::size_t r = 0; r < ds.location_ids.size(); ++r) ds.location_ids[r] = r;
  ds.validate();
  return ds;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double threshold = rel_tol * sv(0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  return rank;
}

void DesignSpec::validate() const {
  const auto s = subjects();
  if (k() < 1) throw ValidationError("design needs at least one regressor of interest");
  if (t() < 1) throw ValidationError("contrast needs at least one row");
  if (static_cast<std::size_t>(contrast.cols()) != k())
    throw ValidationError("contrast has " + std::to_string(contrast.cols()) +
                          " columns, expected k = " + std::to_string(k()));
  if (l() > 0 && static_cast<std::size_t>(nuisance.rows()) != s)
    throw ValidationError("nuisance matrix has " + std::to_string(nuisance.rows()) +
                          " rows, expected " + std::to_string(s));
  if (!interest.allFinite() || !nuisance.allFinite() || !contrast.allFinite())
    throw ValidationError("design contains non-finite values");
  if (k() + l() >= s)
    throw ValidationError("no residual degrees of freedom: k + l = " + std::to_string(k() + l()) +
                          " but only " + std::to_string(s) + " subjects");
  if (l() == 0 && !allow_no_intercept)
    throw ValidationError("nuisance block is empty; an intercept is required unless "
                          "explicitly disabled");
  if (l() > 0) {
    bool has_intercept = false;
    for (Eigen::Index c = 0; c < nuisance.cols() && !has_intercept; ++c) {
      const auto col = nuisance.col(c);
      has_intercept = col(0) != 0.0 && (col.array() == col(0)).all();
    }
    if (!has_intercept && !allow_no_intercept)
      throw ValidationError("nuisance block has no constant (intercept) column");
  }
  Eigen::MatrixXd full(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k() + l()));
  full << interest, nuisance;
  if (numerical_rank(full) != k() + l())
    throw RankError("design [X Z] is rank deficient (rank " + std::to_string(numerical_rank(full)) +
                    " < " + std::to_string(k() + l()) + ")");
  if (numerical_rank(contrast) != t())
    throw RankError("contrast rows are linearly dependent (rank " +
                    std::to_string(numerical_rank(contrast)) + " < " + std::to_string(t()) + ")");
}

DesignSpec two_group_design(std::size_t first_group, std::size_t second_group) {
  const auto s = static_cast<Eigen::Index>(first_group + second_group);
  DesignSpec d;
  d.interest = Eigen::MatrixXd::Zero(s, 1);
  d.interest.bottomRows(static_cast<Eigen::Index>(second_group)).setOnes();
  d.nuisance = Eigen::MatrixXd::Ones(s, 1);
  d.contrast = Eigen::MatrixXd::Ones(1, 1);
  return d;
}

DataFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".raw") ? DataFormat::binary : DataFormat::csv;
}

FunctionalDataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  FunctionalDataset ds;
  if (format == DataFormat::binary) {
    auto in = open_input(path, std::ios::binary);
    const auto rows = read_u64_le(in, 0);
    const auto cols = read_u64_le(in, 8);
    if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 40) / rows)
      throw ParseError("byte offset 0: implausible dimensions " + std::to_string(rows) + " x " +
                       std::to_string(cols));
    ds.responses.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    double* data = ds.responses.data();
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const std::uint64_t bits = read_u64_le(in, 16 + 8 * i);
      data[i] = std::bit_cast<double>(bits);
    }
    ds.domain = Domain::grid(cols, 1);
  } else {
    auto in = open_input(path, std::ios::in);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(position(1) + ": empty file");
    ++line_no;
    std::istringstream header(std::string(text::trim(line)));
    std::string hash, tag, kind;
    header >> hash >> tag >> kind;
    if (hash != "#" || tag != "domain:")
      throw ParseError(position(1) + ": expected '# domain: grid W H' or '# domain: points d'");
    std::vector<std::vector<double>> coords;
    if (kind == "grid") {
      std::size_t w = 0, h = 0;
      if (!(header >> w >> h) || w == 0 || h == 0)
        throw ParseError(position(1) + ": grid header needs positive width and height");
      ds.domain = Domain::grid(w, h);
    } else if (kind == "points") {
      std::size_t d = 0;
      if (!(header >> d) || d == 0) throw ParseError(position(1) + ": points header needs d >= 1");
      for (std::size_t axis = 0; axis < d; ++axis) {
        if (!std::getline(in, line)) throw ParseError(position(line_no + 1) + ": missing coordinates");
        ++line_no;
        auto body = text::trim(line);
        constexpr std::string_view prefix = "# coord:";
        if (body.substr(0, prefix.size()) != prefix)
          throw ParseError(position(line_no) + ": expected '# coord:' line for axis " +
                           std::to_string(axis));
        coords.push_back(parse_row(body.substr(prefix.size()), line_no));
      }
    } else {
      throw ParseError(position(1) + ": unknown domain kind '" + kind + "'");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = text::trim(line);
      if (body.empty() || body.front() == '#') continue;
      rows.push_back(parse_row(body, line_no));
      if (rows.back().size() != rows.front().size())
        throw ParseError(position(line_no) + ": expected " + std::to_string(rows.front().size()) +
                         " columns, found " + std::to_string(rows.back().size()));
    }
    if (rows.empty()) throw ParseError(position(line_no) + ": no data rows");
    const auto s = rows.size();
    const auto n = rows.front().size();
    ds.responses.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t r = 0; r < n; ++r)
        ds.responses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = rows[i][r];
    if (kind == "points") {
      RowMatrix c(static_cast<Eigen::Index>(coords.size()),
                  static_cast<Eigen::Index>(coords.front().size()));
      for (std::size_t a = 0; a < coords.size(); ++a) {
        if (coords[a].size() != coords.front().size())
          throw ParseError("coordinate axes have different lengths");
        for (std::size_t r = 0; r < coords[a].size(); ++r)
          c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) = coords[a][r];
      }
      ds.domain = Domain::points(std::move(c));
    }
  }
  ds.location_ids.resize(ds.locations());
  for (std::size_t r = 0; r < ds.location_ids.size(); ++r) ds.location_ids[r] = r;
  ds.validate();
  return ds;
}

void save_dataset(const FunctionalDataset& dataset, const std::filesystem::path& path,
                  DataFormat format) {
  const auto s = dataset.subjects();
  const auto n = dataset.locations();
  if (format == DataFormat::binary) {
    auto out = open_output(path, std::ios::binary | std::ios::trunc);
    write_u64_le(out, s);
    write_u64_le(out, n);
    const double* data = dataset.responses.data();
    for (std::size_t i = 0; i < s * n; ++i) write_u64_le(out, std::bit_cast<std::uint64_t>(data[i]));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    return;
  }
  auto out = open_output(path, std::ios::out | std::ios::trunc);
  if (dataset.domain.kind == Domain::Kind::grid) {
    out << "# domain: grid " << dataset.domain.width << ' ' << dataset.domain.height << '\n';
  } else {
    out << "# domain: points " << dataset.domain.dimension << '\n';
    for (Eigen::Index a = 0; a < dataset.domain.coordinates.rows(); ++a) {
      out << "# coord:";
      write_row(out, dataset.domain.coordinates.row(a).data(), n);
    }
  }
  for (std::size_t i = 0; i < s; ++i)
    write_row(out, dataset.responses.row(static_cast<Eigen::Index>(i)).data(), n);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DesignSpec load_design(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(position(1) + ": empty design file");
  std::istringstream header(std::string(text::trim(line)));
  std::string hash, tag, tok;
  header >> hash >> tag;
  if (hash != "#" || tag != "design:")
    throw ParseError(position(1) + ": expected '# design: k=K l=L t=T'");
  std::vector<std::string> tokens;
  while (header >> tok) tokens.push_back(tok);
  const auto k = header_value(tokens, "k", 1);
  const auto l = header_value(tokens, "l", 1);
  const auto t = header_value(tokens, "t", 1);
  DesignSpec d;
  for (const auto& tk : tokens)
    if (tk == "intercept=none") d.allow_no_intercept = true;

  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    rows.push_back(parse_row(body, line_no));
    line_numbers.push_back(line_no);
  }
  if (rows.size() < t) throw ParseError("design file has fewer than t = " + std::to_string(t) +
                                        " contrast rows");
  d.contrast.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < t; ++i) {
    if (rows[i].size() != k)
      throw ParseError(position(line_numbers[i]) + ": contrast row needs k = " +
                       std::to_string(k) + " values");
    for (std::size_t c = 0; c < k; ++c)
      d.contrast(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  const auto s = rows.size() - t;
  d.interest.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k));
  d.nuisance.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(l));
  for (std::size_t i = 0; i < s; ++i) {
    const auto& row = rows[t + i];
    if (row.size() != k + l)
      throw ParseError(position(line_numbers[t + i]) + ": design row needs k + l = " +
                       std::to_string(k + l) + " values, found " + std::to_string(row.size()));
    for (std::size_t c = 0; c < k; ++c)
      d.interest(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
    for (std::size_t c = 0; c < l; ++c)
      d.nuisance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[k + c];
  }
  d.validate();
  return d;
}

void save_design(const DesignSpec& design, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out | std::ios::trunc);
  out << "# design: k=" << design.k() << " l=" << design.l() << " t=" << design.t();
  if (design.allow_no_intercept) out << " intercept=none";
  out << '\n';
  std::vector<double> row;
  for (Eigen::Index i = 0; i < design.contrast.rows(); ++i) {
    row.clear();
    for (Eigen::Index c = 0; c < design.contrast.cols(); ++c) row.push_back(design.contrast(i, c));
    write_row(out, row.data(), row.size());
  }
  for (std::size_t i = 0; i < design.subjects(); ++i) {
    row.clear();
    for (std::size_t c = 0; c < design.k(); ++c)
      row.push_back(design.interest(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    for (std::size_t c = 0; c < design.l(); ++c)
      row.push_back(design.nuisance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    write_row(out, row.data(), row.size());
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace permglm
