#pragma once

// CSV tables and the JSON run report written by the command-line driver.
// CSV files start with "# schema: oulab/<table>/v1" followed by the column
// header; numbers use 17 significant digits with no locale.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "ou/config.hpp"
#include "ou/evolution.hpp"
#include "ou/inequalities.hpp"

namespace ou {

inline constexpr std::string_view kVersion = "oulab 1.0.0";
inline constexpr int kSchemaVersion = 1;

/// "%.17g" in the C locale.
std::string format_number(double value);

class CsvTable {
 public:
  CsvTable(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  template <typename... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> r;
    r.reserve(sizeof...(Cells));
    (r.push_back(cell(cells)), ...);
    append(std::move(r));
  }

  /// Schema line, header and rows.
  std::string text() const;
  /// Writes <dir>/<name>.csv.
  void write(const std::filesystem::path& dir) const;

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_number(static_cast<double>(v));
    } else if constexpr (std::is_same_v<T, Verdict>) {
      return to_string(v);
    } else {
      return escape(std::string(v));
    }
  }
  static std::string escape(const std::string& text);
  void append(std::vector<std::string> r);

  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct CheckResult {
  std::string name;
  Verdict status = Verdict::Fail;
  /// Asserted checks decide the exit status; the others are evidence only.
  bool asserted = true;
  std::string summary;
  /// Human-readable failing rows, printed on CheckFailed.
  std::vector<std::string> failures;
  nlohmann::json details = nlohmann::json::object();
};

struct RunReport {
  std::string subcommand;
  ExperimentConfig config;
  std::vector<CheckResult> checks;
  /// Artifact file names written for this run.
  std::vector<std::string> artifacts;
  /// Wall-clock seconds per subcommand; written to run_meta.json only.
  std::map<std::string, double> timings;

  bool passed() const;
  /// Deterministic content: config echo, verdicts and details; no timings.
  nlohmann::json to_json() const;
  nlohmann::json meta_json() const;
  /// Writes report.json and run_meta.json into dir.
  void write(const std::filesystem::path& dir) const;
};

nlohmann::json to_json(const DecayCertificate& cert);

}  // namespace ou
