#include "ou/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ou/error.hpp"

namespace ou {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) invalid("'" + key + "': not a number: '" + raw + "'");
  return value;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) invalid("'" + key + "': not a non-negative integer: '" + raw + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  invalid("'" + key + "': not a boolean: '" + raw + "'");
}

std::vector<std::string> split(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : split(raw)) out.push_back(parse_double(key, item));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i];
  }
  return out;
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> names{"evolve", "covariance", "invariance", "diffcheck",
                                           "logsob", "hyper",      "spde",       "ergodic"};
  return names;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

int ExperimentConfig::dim() const {
  const auto it = params.find("n");
  return it == params.end() ? 0 : static_cast<int>(it->second);
}

double ExperimentConfig::t_min() const {
  const auto it = params.find("t_min");
  return it == params.end() ? std::nan("") : it->second;
}

double ExperimentConfig::t_max() const {
  const auto it = params.find("t_max");
  return it == params.end() ? std::nan("") : it->second;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid(std::string("syntax: ") + e.what());
  }

  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) invalid("key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string value = node.data();
      const std::string where = section + "." + key;
      if (section == "model") {
        if (key == "name") {
          c.model = trim(value);
        } else {
          c.params[key] = parse_double(where, value);
        }
      } else if (section == "run") {
        if (key == "seed") c.seed = parse_unsigned(where, value);
        else if (key == "workers") c.workers = static_cast<int>(parse_unsigned(where, value));
        else if (key == "output") c.output = trim(value);
        else if (key == "checks") c.checks = split(value);
        else invalid("unknown key " + where);
      } else if (section == "grid") {
        if (key == "s") c.s_values = parse_list(where, value);
        else if (key == "t") c.t_values = parse_list(where, value);
        else invalid("unknown key " + where);
      } else if (section == "tolerance") {
        if (key == "tail") c.tol_tail = parse_double(where, value);
        else if (key == "invariance") c.tol_invariance = parse_double(where, value);
        else if (key == "chain") c.tol_chain = parse_double(where, value);
        else if (key == "derivative") c.tol_derivative = parse_double(where, value);
        else if (key == "z_limit") c.z_limit = parse_double(where, value);
        else invalid("unknown key " + where);
      } else if (section == "probes") {
        if (key == "count") c.probe_count = parse_unsigned(where, value);
        else if (key == "chain_triples") c.chain_triples = parse_unsigned(where, value);
        else invalid("unknown key " + where);
      } else if (section == "mc") {
        if (key == "count") c.mc_count = parse_unsigned(where, value);
        else invalid("unknown key " + where);
      } else if (section == "diffcheck") {
        if (key == "s") c.diff_s = parse_double(where, value);
        else if (key == "t") c.diff_t = parse_double(where, value);
        else if (key == "fd_step") c.fd_step = parse_double(where, value);
        else if (key == "probes") c.diff_probes = parse_unsigned(where, value);
        else invalid("unknown key " + where);
      } else if (section == "logsob") {
        if (key == "t") c.logsob_t = parse_double(where, value);
        else if (key == "p") c.logsob_p = parse_list(where, value);
        else if (key == "count") c.logsob_count = parse_unsigned(where, value);
        else invalid("unknown key " + where);
      } else if (section == "hyper") {
        if (key == "s") c.hyper_s = parse_double(where, value);
        else if (key == "t") c.hyper_t = parse_double(where, value);
        else if (key == "q") c.hyper_q = parse_list(where, value);
        else if (key == "p") c.hyper_p = parse_list(where, value);
        else if (key == "assert") c.hyper_assert = parse_bool(where, value);
        else if (key == "sharpness_p") c.sharpness_p = parse_list(where, value);
        else if (key == "count") c.hyper_count = parse_unsigned(where, value);
        else invalid("unknown key " + where);
      } else if (section == "ergodic") {
        if (key == "t") c.ergodic_t = parse_double(where, value);
        else if (key == "s") c.ergodic_s = parse_list(where, value);
        else if (key == "tolerance") c.ergodic_tol = parse_double(where, value);
        else invalid("unknown key " + where);
      } else if (section == "spde") {
        if (key == "s") c.spde_s = parse_double(where, value);
        else if (key == "t") c.spde_t = parse_double(where, value);
        else if (key == "h") c.spde_h = parse_double(where, value);
        else if (key == "paths") c.spde_paths = parse_unsigned(where, value);
        else if (key == "x0") c.spde_x0 = parse_list(where, value);
        else invalid("unknown key " + where);
      } else {
        invalid("unknown section [" + section + "]");
      }
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate(const ExperimentConfig& c) {
  if (c.model.empty()) invalid("model.name is required");
  if (c.params.count("n") && (c.dim() < 1 || static_cast<double>(c.dim()) != c.params.at("n"))) {
    invalid("model.n must be an integer >= 1");
  }
  if (c.params.count("t_min") && c.params.count("t_max") && !(c.t_min() < c.t_max())) {
    invalid("window must satisfy t_min < t_max");
  }
  for (const auto& [key, value] : c.params) {
    if (!std::isfinite(value)) invalid("model." + key + " must be finite");
  }
  if (c.workers < 1) invalid("run.workers must be >= 1");
  if (c.output.empty()) invalid("run.output must not be empty");
  for (const auto& check : c.checks) {
    if (!known_checks().count(check)) invalid("run.checks: unknown check '" + check + "'");
  }
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) invalid(std::string(name) + " must be > 0");
  };
  positive(c.tol_tail, "tolerance.tail");
  if (c.tol_invariance < 0.0) invalid("tolerance.invariance must be > 0 (or 0 for the default)");
  positive(c.tol_chain, "tolerance.chain");
  positive(c.tol_derivative, "tolerance.derivative");
  positive(c.z_limit, "tolerance.z_limit");
  positive(c.fd_step, "diffcheck.fd_step");
  positive(c.spde_h, "spde.h");
  positive(c.ergodic_tol, "ergodic.tolerance");
  if (c.mc_count < 2 || c.logsob_count < 2 || c.hyper_count < 2 || c.spde_paths < 2) {
    invalid("sample counts must be >= 2");
  }
  if (c.s_values.empty() || c.t_values.empty()) invalid("grid.s and grid.t must be nonempty");
  if (!(c.diff_s < c.diff_t)) invalid("diffcheck needs s < t");
  if (!(c.hyper_s < c.hyper_t)) invalid("hyper needs s < t");
  if (!(c.spde_s < c.spde_t)) invalid("spde needs s < t");
  for (double p : c.logsob_p) {
    if (!(p > 1.0)) invalid("logsob.p values must be > 1");
  }
  for (double q : c.hyper_q) {
    if (!(q > 1.0)) invalid("hyper.q values must be > 1");
  }
  for (double p : c.hyper_p) {
    if (!(p >= 1.0)) invalid("hyper.p values must be >= 1");
  }
  if (c.ergodic_s.empty()) invalid("ergodic.s must be nonempty");
  if (!c.spde_x0.empty() && c.dim() > 0 && static_cast<int>(c.spde_x0.size()) != c.dim()) {
    invalid("spde.x0 must have n entries");
  }
}

std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[model]\nname = " << c.model << "\n";
  for (const auto& [key, value] : c.params) out << key << " = " << format_double(value) << "\n";
  out << "\n[run]\nseed = " << c.seed << "\nworkers = " << c.workers << "\noutput = " << c.output << "\n";
  if (!c.checks.empty()) out << "checks = " << join(c.checks) << "\n";
  out << "\n[grid]\ns = " << join(c.s_values) << "\nt = " << join(c.t_values) << "\n";
  out << "\n[tolerance]\ntail = " << format_double(c.tol_tail) << "\ninvariance = " << format_double(c.tol_invariance)
      << "\nchain = " << format_double(c.tol_chain) << "\nderivative = " << format_double(c.tol_derivative)
      << "\nz_limit = " << format_double(c.z_limit) << "\n";
  out << "\n[probes]\ncount = " << c.probe_count << "\nchain_triples = " << c.chain_triples << "\n";
  out << "\n[mc]\ncount = " << c.mc_count << "\n";
  out << "\n[diffcheck]\ns = " << format_double(c.diff_s) << "\nt = " << format_double(c.diff_t)
      << "\nfd_step = " << format_double(c.fd_step) << "\nprobes = " << c.diff_probes << "\n";
  out << "\n[logsob]\nt = " << format_double(c.logsob_t) << "\np = " << join(c.logsob_p)
      << "\ncount = " << c.logsob_count << "\n";
  out << "\n[hyper]\ns = " << format_double(c.hyper_s) << "\nt = " << format_double(c.hyper_t)
      << "\nq = " << join(c.hyper_q) << "\np = " << join(c.hyper_p) << "\nassert = " << (c.hyper_assert ? "true" : "false")
      << "\nsharpness_p = " << join(c.sharpness_p) << "\ncount = " << c.hyper_count << "\n";
  out << "\n[ergodic]\nt = " << format_double(c.ergodic_t) << "\ns = " << join(c.ergodic_s)
      << "\ntolerance = " << format_double(c.ergodic_tol) << "\n";
  out << "\n[spde]\ns = " << format_double(c.spde_s) << "\nt = " << format_double(c.spde_t)
      << "\nh = " << format_double(c.spde_h) << "\npaths = " << c.spde_paths << "\n";
  if (!c.spde_x0.empty()) out << "x0 = " << join(c.spde_x0) << "\n";
  return out.str();
}

}  // namespace ou
