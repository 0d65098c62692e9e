#pragma once

// Path simulation of dZ = A(t) Z dt + B(t) dW on the truncation and the
// comparison of the terminal law with N(U(t,s)x, Q(t,s)).

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ou/model.hpp"

namespace ou {

struct PathEnsemble {
  double s = 0.0;
  double t = 0.0;
  Vector x0;
  double step = 0.0;
  int steps = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string scheme;
  /// Recorded times and, for each, a dim x count matrix of states.
  std::vector<double> times;
  std::vector<Matrix> states;

  const Matrix& terminal() const { return states.back(); }
};

struct SimulateOptions {
  /// Record every k-th step; 0 records the initial and terminal states only.
  int record_every = 0;
};

/// Diagonal models use the exact per-mode transition over each step; dense
/// models use Euler-Maruyama. The step is (t-s)/ceil((t-s)/h).
/// Noise for path p, step k, coordinate i is normal((p*steps + k)*dim + i) of seed_stream(seed, "spde").
PathEnsemble simulate(const OperatorFamily& model, double s, double t, const Vector& x0, double h, std::size_t count,
                      std::uint64_t seed, const SimulateOptions& options = {});

struct LawCheckReport {
  Vector mean;
  Vector predicted_mean;
  Matrix cov;
  Matrix predicted_cov;
  Vector mean_z;
  Matrix cov_z;
  double max_mean_z = 0.0;
  double max_cov_z = 0.0;
  /// Declared scheme bias subtracted before forming z-scores (0 for the exact scheme).
  double mean_bias = 0.0;
  double cov_bias = 0.0;
  double z_limit = 5.0;
  bool pass = false;
};

LawCheckReport law_check(const PathEnsemble& ensemble, const OperatorFamily& model, double z_limit = 5.0);

/// Long format: path_id,time,coord,value.
void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble);

}  // namespace ou
