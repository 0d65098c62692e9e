#pragma once

// Experiment configuration: an INI file with typed sections.
//
//   [model]      name, n, t_min, t_max and model parameters
//   [run]        seed, workers, output, checks
//   [grid]       s, t                     (comma-separated lists)
//   [tolerance]  tail, invariance, chain, derivative, z_limit
//   [probes]     count, chain_triples
//   [mc]         count
//   [diffcheck]  s, t, fd_step, probes
//   [logsob]     t, p, count
//   [hyper]      s, t, q, p, assert, sharpness_p, count
//   [ergodic]    t, s, tolerance
//   [spde]       s, t, h, paths, x0

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ou {

struct ExperimentConfig {
  std::string model = "diagonal-constant";
  /// Model parameters including n, t_min and t_max (catalog defaults fill the rest).
  std::map<std::string, double> params;

  std::uint64_t seed = 20240611;
  int workers = 1;
  std::string output = "oulab-out";
  std::vector<std::string> checks;

  std::vector<double> s_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> t_values{0.5, 1.0, 1.5, 2.0};

  double tol_tail = 1e-12;
  double tol_invariance = 0.0;  // 0 selects the model default
  double tol_chain = 1e-8;
  double tol_derivative = 1e-6;
  double z_limit = 5.0;

  std::size_t probe_count = 0;  // 0 selects 2n + 16
  std::size_t chain_triples = 50;

  std::size_t mc_count = 100000;

  double diff_s = 0.0;
  double diff_t = 1.0;
  double fd_step = 1e-4;
  std::size_t diff_probes = 20;

  double logsob_t = 0.0;
  std::vector<double> logsob_p{1.5, 2.0, 3.0};
  std::size_t logsob_count = 100000;

  double hyper_s = 0.0;
  double hyper_t = 0.69314718055994529;
  std::vector<double> hyper_q{2.0};
  std::vector<double> hyper_p{2.0, 2.5, 3.0};
  bool hyper_assert = true;
  std::vector<double> sharpness_p{4.5, 6.0};
  std::size_t hyper_count = 100000;

  double ergodic_t = 0.0;
  std::vector<double> ergodic_s{-1.0, -2.0, -4.0, -8.0};
  double ergodic_tol = 1e-3;

  double spde_s = 0.0;
  double spde_t = 1.0;
  double spde_h = 1e-2;
  std::size_t spde_paths = 100000;
  std::vector<double> spde_x0;  // empty selects e_1

  int dim() const;
  double t_min() const;
  double t_max() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigInvalid on syntax errors, unknown keys or failed validation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Lossless: parse_config(to_ini(c)) == c.
std::string to_ini(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace ou
