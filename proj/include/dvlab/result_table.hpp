#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dvlab {

inline constexpr const char *kToolVersion = "0.1.0";

using Cell = std::variant<std::int64_t, double, std::string>;

/// Everything needed to rerun an experiment and get the same numbers.
struct RunManifest {
  std::string experiment;
  std::string body;          ///< body text form, or empty when not applicable
  nlohmann::json params;     ///< the experiment's full parameter record
  std::uint64_t master_seed = 0;
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  unsigned workers = 0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json &j);
};

/// Rectangular result table with uniquely named columns, a key/value
/// summary and the manifest of the run that produced it.
class ResultTable {
public:
  explicit ResultTable(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);
  void add_summary(std::string key, Cell value);
  void add_warning(std::string text) { warnings_.push_back(std::move(text)); }
  /// Marks the run as a numerical failure (CLI exit code 2).
  void set_numerical_failure() { numerical_failure_ = true; }

  const std::vector<std::string> &columns() const { return columns_; }
  const std::vector<std::vector<Cell>> &rows() const { return rows_; }
  const std::vector<std::pair<std::string, Cell>> &summary() const { return summary_; }
  const std::vector<std::string> &warnings() const { return warnings_; }
  bool numerical_failure() const { return numerical_failure_; }

  const Cell &at(std::size_t row, const std::string &column) const;
  const Cell &summary_value(const std::string &key) const;
  double summary_number(const std::string &key) const;

  RunManifest manifest;

  /// Header row plus data rows.
  void write_csv(std::ostream &os) const;
  /// Sidecar written next to the CSV: manifest plus summary and warnings.
  nlohmann::json sidecar_json() const;
  /// Self-contained JSON: columns, rows, summary, warnings and manifest.
  nlohmann::json to_json() const;

  /// Numeric cells (rows and summary) compare bit-identical.
  bool same_values(const ResultTable &other) const;

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::pair<std::string, Cell>> summary_;
  std::vector<std::string> warnings_;
  bool numerical_failure_ = false;
};

double as_number(const Cell &c);
std::string format_cell(const Cell &c);

} // namespace dvlab
