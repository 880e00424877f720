#include "dvlab/result_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>

#include "dvlab/errors.hpp"

namespace dvlab {

namespace {

nlohmann::json cell_json(const Cell &c) {
  return std::visit(
      [](const auto &v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) {
            return format_cell(Cell{v});
          }
        }
        return v;
      },
      c);
}

bool bit_equal(const Cell &a, const Cell &b) {
  if (a.index() != b.index()) {
    return false;
  }
  if (const auto *x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return std::memcmp(x, &y, sizeof(double)) == 0;
  }
  return a == b;
}

std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') {
      out += '"';
    }
    out += ch;
  }
  return out + "\"";
}

} // namespace

nlohmann::json RunManifest::to_json() const {
  return {{"experiment", experiment}, {"body", body},       {"params", params},
          {"master_seed", master_seed}, {"tool_version", tool_version},
          {"wall_seconds", wall_seconds}, {"workers", workers}};
}

RunManifest RunManifest::from_json(const nlohmann::json &j) {
  RunManifest m;
  m.experiment = j.at("experiment").get<std::string>();
  m.body = j.value("body", std::string{});
  m.params = j.at("params");
  m.master_seed = j.value("master_seed", std::uint64_t{0});
  m.tool_version = j.value("tool_version", std::string{kToolVersion});
  m.wall_seconds = j.value("wall_seconds", 0.0);
  m.workers = j.value("workers", 0u);
  return m;
}

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  std::set<std::string> seen;
  for (const auto &c : columns_) {
    if (!seen.insert(c).second) {
      throw UsageError("ResultTable: duplicate column '" + c + "'");
    }
  }
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw UsageError("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                     std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

void ResultTable::add_summary(std::string key, Cell value) {
  for (const auto &[k, v] : summary_) {
    if (k == key) {
      throw UsageError("ResultTable: duplicate summary key '" + key + "'");
    }
  }
  summary_.emplace_back(std::move(key), std::move(value));
}

const Cell &ResultTable::at(std::size_t row, const std::string &column) const {
  const auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) {
    throw UsageError("ResultTable: no column '" + column + "'");
  }
  return rows_.at(row).at(static_cast<std::size_t>(it - columns_.begin()));
}

const Cell &ResultTable::summary_value(const std::string &key) const {
  for (const auto &[k, v] : summary_) {
    if (k == key) {
      return v;
    }
  }
  throw UsageError("ResultTable: no summary key '" + key + "'");
}

double ResultTable::summary_number(const std::string &key) const { return as_number(summary_value(key)); }

double as_number(const Cell &c) {
  if (const auto *i = std::get_if<std::int64_t>(&c)) {
    return static_cast<double>(*i);
  }
  if (const auto *d = std::get_if<double>(&c)) {
    return *d;
  }
  throw UsageError("cell is not numeric: '" + std::get<std::string>(c) + "'");
}

std::string format_cell(const Cell &c) {
  if (const auto *i = std::get_if<std::int64_t>(&c)) {
    return std::to_string(*i);
  }
  if (const auto *d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) {
      return "nan";
    }
    if (std::isinf(*d)) {
      return *d > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(c);
}

void ResultTable::write_csv(std::ostream &os) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    os << (i ? "," : "") << csv_escape(columns_[i]);
  }
  os << '\n';
  for (const auto &row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    }
    os << '\n';
  }
}

nlohmann::json ResultTable::sidecar_json() const {
  nlohmann::json summary = nlohmann::json::object();
  for (const auto &[k, v] : summary_) {
    summary[k] = cell_json(v);
  }
  return {{"manifest", manifest.to_json()}, {"summary", summary}, {"warnings", warnings_}};
}

nlohmann::json ResultTable::to_json() const {
  nlohmann::json j = sidecar_json();
  j["columns"] = columns_;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &row : rows_) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto &c : row) {
      r.push_back(cell_json(c));
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

bool ResultTable::same_values(const ResultTable &other) const {
  if (columns_ != other.columns_ || rows_.size() != other.rows_.size() ||
      summary_.size() != other.summary_.size()) {
    return false;
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (!bit_equal(rows_[r][c], other.rows_[r][c])) {
        return false;
      }
    }
  }
  for (std::size_t i = 0; i < summary_.size(); ++i) {
    if (summary_[i].first != other.summary_[i].first || !bit_equal(summary_[i].second, other.summary_[i].second)) {
      return false;
    }
  }
  return true;
}

} // namespace dvlab
