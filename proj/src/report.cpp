#include "ou/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "ou/error.hpp"

namespace ou {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvTable::CsvTable(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

std::string CsvTable::escape(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void CsvTable::append(std::vector<std::string> r) {
  if (r.size() != columns_.size()) {
    throw Error(ErrorCode::BadParameter, "table " + name_ + ": row width does not match the header");
  }
  rows_.push_back(std::move(r));
}

std::string CsvTable::text() const {
  std::string out = "# schema: oulab/" + name_ + "/v" + std::to_string(kSchemaVersion) + "\n";
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& dir) const { write_file(dir / (name_ + ".csv"), text()); }

bool RunReport::passed() const {
  for (const auto& c : checks) {
    if (c.asserted && c.status == Verdict::Fail) return false;
  }
  return true;
}

nlohmann::json to_json(const DecayCertificate& cert) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& [s, t] : cert.grid) grid.push_back({s, t});
  return {{"mode", to_string(cert.mode)}, {"M", cert.M},         {"zeta", cert.zeta},   {"C", cert.C},
          {"eta", cert.eta},              {"alpha", cert.alpha}, {"residual", cert.residual},
          {"sound", cert.sound},          {"grid", grid}};
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name},
                           {"status", ou::to_string(c.status)},
                           {"asserted", c.asserted},
                           {"summary", c.summary},
                           {"failures", c.failures},
                           {"details", c.details}});
  }
  return {{"version", std::string(kVersion)},
          {"schema", kSchemaVersion},
          {"subcommand", subcommand},
          {"config", to_ini(config)},
          {"checks", checks_json},
          {"artifacts", artifacts},
          {"exit_status", passed() ? 0 : 1}};
}

nlohmann::json RunReport::meta_json() const {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"version", std::string(kVersion)},
          {"finished_utc", stamp},
          {"workers", config.workers},
          {"hardware_threads", std::thread::hardware_concurrency()},
          {"seconds", timings}};
}

void RunReport::write(const std::filesystem::path& dir) const {
  write_file(dir / "report.json", to_json().dump(2) + "\n");
  write_file(dir / "run_meta.json", meta_json().dump(2) + "\n");
}

}  // namespace ou
