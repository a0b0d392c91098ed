#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "orthoinfer/errors.hpp"

namespace orthoinfer {

struct Dataset {
  Eigen::VectorXd Y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_ids;
  bool centered = false;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

// Convenience constructor for synthetic designs: ids x1..xp.
inline Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd Y, bool centered = false) {
  if (Y.size() != X.rows()) throw DataError("make_dataset: Y length must equal row count");
  Dataset d;
  d.X = std::move(X);
  d.Y = std::move(Y);
  d.centered = centered;
  d.column_ids.reserve(static_cast<std::size_t>(d.X.cols()));
  for (Eigen::Index j = 0; j < d.X.cols(); ++j)
    d.column_ids.push_back("x" + std::to_string(j + 1));
  return d;
}

struct CollapseGroup {
  int head = 0;                       // retained column (original index)
  std::vector<int> members;           // collapsed-away original indices
  std::vector<double> correlations;   // corr(head, member), same order
};

struct CollapseMap {
  std::vector<int> retained;          // original indices that survive, in order
  std::vector<CollapseGroup> groups;  // one per retained column
};

inline nlohmann::json to_json(const CollapseMap& m) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : m.groups)
    groups.push_back({{"head", g.head}, {"members", g.members}, {"correlations", g.correlations}});
  return {{"retained", m.retained}, {"groups", groups}};
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? comma : comma - start);
    // Trim surrounding blanks so "a, b" headers behave.
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw DataError("load_csv: non-numeric cell '" + cell + "' at data row " +
                    std::to_string(row) + ", column '" + column + "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail

// CSV ingestion: mandatory header row, comma separators, plain decimal reals.
// Lines starting with '#' are ignored so report files can carry provenance.
inline Dataset load_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open file '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = detail::split_fields(line);
    break;
  }
  if (header.empty()) throw DataError("load_csv: no header row in '" + path + "'");
  {
    std::unordered_set<std::string> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second)
        throw DataError("load_csv: duplicate header '" + h + "' in '" + path + "'");
  }
  std::ptrdiff_t response_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == response_column) response_idx = static_cast<std::ptrdiff_t>(i);
  if (response_idx < 0)
    throw DataError("load_csv: response column '" + response_column + "' not found in '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++data_row;
    auto fields = detail::split_fields(line);
    if (fields.size() != header.size())
      throw DataError("load_csv: row " + std::to_string(data_row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    std::vector<double> vals(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      vals[c] = detail::parse_cell(fields[c], data_row, header[c]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw DataError("load_csv: no data rows in '" + path + "'");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
  Dataset d;
  d.Y.resize(n);
  d.X.resize(n, p);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != response_idx) d.column_ids.push_back(header[i]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<std::ptrdiff_t>(c) == response_idx)
        d.Y(i) = rows[static_cast<std::size_t>(i)][c];
      else
        d.X(i, col++) = rows[static_cast<std::size_t>(i)][c];
    }
  }
  d.centered = false;
  return d;
}

// Shortest round-trip formatting, so load_csv(write_csv(d)) is bit-exact.
inline void write_csv(const Dataset& d, const std::string& path,
                      const std::string& response_label = "y") {
  std::ofstream out(path);
  if (!out) throw DataError("write_csv: cannot open file '" + path + "' for writing");
  out << response_label;
  for (const auto& id : d.column_ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out << detail::format_double(d.Y(i));
    for (Eigen::Index j = 0; j < d.p(); ++j) out << ',' << detail::format_double(d.X(i, j));
    out << '\n';
  }
  if (!out) throw DataError("write_csv: write failure on '" + path + "'");
}

// Subtract each column's sample mean. A no-op on already-centered data, which
// makes the operation exactly idempotent.
inline Dataset center_columns(Dataset d) {
  if (d.centered) return d;
  d.X.rowwise() -= d.X.colwise().mean();
  d.centered = true;
  return d;
}

// Single left-to-right pass: a column joins the current group while its
// correlation with the group head exceeds the threshold; otherwise it starts
// a new group. The head (first member) of every group is retained.
inline std::pair<Dataset, CollapseMap> collapse_correlated(const Dataset& d, double threshold) {
  if (!d.centered) throw DataError("collapse_correlated: dataset must be centered first");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw DataError("collapse_correlated: threshold must lie in (0,1]");
  const Eigen::Index p = d.p();
  if (p == 0) return {d, CollapseMap{}};

  std::vector<double> norms(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    double nrm = d.X.col(j).norm();
    if (nrm <= 1e-12 * (1.0 + d.X.col(j).cwiseAbs().maxCoeff()))
      throw DataError("collapse_correlated: column '" + d.column_ids[static_cast<std::size_t>(j)] +
                      "' has zero variance; correlation undefined");
    norms[static_cast<std::size_t>(j)] = nrm;
  }

  CollapseMap map;
  map.groups.push_back(CollapseGroup{0, {}, {}});
  for (Eigen::Index j = 1; j < p; ++j) {
    int head = map.groups.back().head;
    double r = d.X.col(head).dot(d.X.col(j)) /
               (norms[static_cast<std::size_t>(head)] * norms[static_cast<std::size_t>(j)]);
    if (std::abs(r) > threshold) {
      map.groups.back().members.push_back(static_cast<int>(j));
      map.groups.back().correlations.push_back(r);
    } else {
      map.groups.push_back(CollapseGroup{static_cast<int>(j), {}, {}});
    }
  }
  for (const auto& g : map.groups) map.retained.push_back(g.head);

  Dataset kept;
  kept.Y = d.Y;
  kept.centered = d.centered;
  kept.X.resize(d.n(), static_cast<Eigen::Index>(map.retained.size()));
  for (std::size_t k = 0; k < map.retained.size(); ++k) {
    kept.X.col(static_cast<Eigen::Index>(k)) = d.X.col(map.retained[k]);
    kept.column_ids.push_back(d.column_ids[static_cast<std::size_t>(map.retained[k])]);
  }
  return {std::move(kept), std::move(map)};
}

}  // namespace orthoinfer
