#include "ou/spde.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ou/covariance.hpp"
#include "ou/evolution.hpp"
#include "ou/parallel.hpp"
#include "ou/rng.hpp"

namespace ou {

namespace {

// Per-step linear map and noise factor: Z_{k+1} = maps[k] Z_k + noise[k] xi_k.
struct StepTables {
  std::vector<Matrix> maps;
  std::vector<Matrix> noise;
};

StepTables exact_tables(const OperatorFamily& model, const std::vector<double>& grid) {
  const std::size_t steps = grid.size() - 1;
  StepTables tables;
  tables.maps.resize(steps);
  tables.noise.resize(steps);
  CovarianceOptions copts;
  copts.check_window = false;
  EvolveOptions eopts;
  eopts.check_window = false;
  for (std::size_t k = 0; k < steps; ++k) {
    tables.maps[k] = evolve(model, grid[k], grid[k + 1], eopts).matrix;
    const Vector q = q_kernel(model, grid[k], grid[k + 1], copts).Q.diagonal();
    tables.noise[k] = q.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  return tables;
}

StepTables euler_tables(const OperatorFamily& model, const std::vector<double>& grid) {
  const std::size_t steps = grid.size() - 1;
  const int n = model.dim;
  StepTables tables;
  tables.maps.resize(steps);
  tables.noise.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = grid[k + 1] - grid[k];
    tables.maps[k] = Matrix::Identity(n, n) + h * model.A(grid[k]);
    const double norm = spectral_norm(tables.maps[k]);
    if (norm > 1.5) {
      std::ostringstream msg;
      msg << "||I + hA(" << grid[k] << ")|| = " << norm << " > 1.5 with h = " << h;
      throw Error(ErrorCode::StepTooLarge, msg.str());
    }
    tables.noise[k] = std::sqrt(h) * model.B(grid[k]);
  }
  return tables;
}

}  // namespace

PathEnsemble simulate(const OperatorFamily& model, double s, double t, const Vector& x0, double h, std::size_t count,
                      std::uint64_t seed, const SimulateOptions& options) {
  if (!(h > 0.0) || !(s < t)) throw Error(ErrorCode::BadParameter, "simulate needs h > 0 and s < t");
  if (count < 1) throw Error(ErrorCode::BadParameter, "simulate needs at least one path");
  if (x0.size() != model.dim) throw Error(ErrorCode::BadParameter, "initial state has the wrong dimension");
  model.require_window(s, t);

  PathEnsemble ens;
  ens.s = s;
  ens.t = t;
  ens.x0 = x0;
  ens.steps = std::max(1, static_cast<int>(std::ceil((t - s) / h - 1e-9)));
  ens.step = (t - s) / ens.steps;
  ens.count = count;
  ens.seed = seed;
  std::vector<double> grid(static_cast<std::size_t>(ens.steps) + 1);
  for (int k = 0; k <= ens.steps; ++k) grid[k] = (k == ens.steps) ? t : s + k * ens.step;

  const bool exact = model.is_diagonal();
  ens.scheme = exact ? "exact-modewise" : "euler-maruyama";
  const StepTables tables = exact ? exact_tables(model, grid) : euler_tables(model, grid);

  std::vector<int> recorded{0};
  if (options.record_every > 0) {
    for (int k = options.record_every; k < ens.steps; k += options.record_every) recorded.push_back(k);
  }
  recorded.push_back(ens.steps);
  for (int k : recorded) {
    ens.times.push_back(grid[k]);
    ens.states.push_back(Matrix(model.dim, static_cast<Eigen::Index>(count)));
  }
  ens.states.front().colwise() = x0;

  const rng::CounterStream stream(rng::seed_stream(seed, "spde"));
  const auto n = static_cast<std::uint64_t>(model.dim);
  const auto steps = static_cast<std::uint64_t>(ens.steps);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t first = chunk * kChunkSize;
    const std::size_t last = std::min(count, first + kChunkSize);
    const auto width = static_cast<Eigen::Index>(last - first);
    Matrix z(model.dim, width);
    z.colwise() = x0;
    Matrix xi(model.dim, width);
    std::size_t slot = 1;
    for (std::uint64_t k = 0; k < steps; ++k) {
      for (Eigen::Index j = 0; j < width; ++j) {
        const std::uint64_t path = first + static_cast<std::uint64_t>(j);
        rng::fill_normals(stream, (path * steps + k) * n, n, xi.col(j).data());
      }
      z = tables.maps[k] * z + tables.noise[k] * xi;
      if (slot < recorded.size() && static_cast<int>(k) + 1 == recorded[slot]) {
        ens.states[slot].middleCols(static_cast<Eigen::Index>(first), width) = z;
        ++slot;
      }
    }
  });
  if (!ens.terminal().allFinite()) throw Error(ErrorCode::IntegratorDiverged, "non-finite path values");
  return ens;
}

LawCheckReport law_check(const PathEnsemble& ensemble, const OperatorFamily& model, double z_limit) {
  LawCheckReport rep;
  rep.z_limit = z_limit;
  const Matrix& x = ensemble.terminal();
  const double n = static_cast<double>(x.cols());
  rep.mean = x.rowwise().sum() / n;
  const Matrix centered = x.colwise() - rep.mean;
  rep.cov = centered * centered.transpose() / std::max(1.0, n - 1.0);

  rep.predicted_mean = evolve(model, ensemble.s, ensemble.t).matrix * ensemble.x0;
  rep.predicted_cov = q_kernel(model, ensemble.s, ensemble.t).Q;

  if (ensemble.scheme == "euler-maruyama") {
    const double span = ensemble.t - ensemble.s;
    double lip = 0.0, noise = 0.0;
    for (int k = 0; k <= 8; ++k) {
      const double tau = ensemble.s + span * k / 8.0;
      lip = std::max(lip, spectral_norm(model.A(tau)));
      noise = std::max(noise, spectral_norm(model.B(tau)));
    }
    const double h = ensemble.step;
    rep.mean_bias = h * span * lip * lip * ensemble.x0.norm();
    rep.cov_bias = h * span * (lip * lip * spectral_norm(rep.predicted_cov) + lip * noise * noise);
  }

  const Eigen::Index d = x.rows();
  auto score = [](double diff, double allowance, double se) {
    const double excess = std::max(0.0, std::abs(diff) - allowance);
    if (se > 0.0) return excess / se;
    return excess <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  rep.mean_z.resize(d);
  rep.cov_z.resize(d, d);
  const Matrix& q = rep.predicted_cov;
  for (Eigen::Index i = 0; i < d; ++i) {
    rep.mean_z(i) = score(rep.mean(i) - rep.predicted_mean(i), rep.mean_bias, std::sqrt(q(i, i) / n));
    for (Eigen::Index j = 0; j < d; ++j) {
      const double se = std::sqrt((q(i, i) * q(j, j) + q(i, j) * q(i, j)) / n);
      rep.cov_z(i, j) = score(rep.cov(i, j) - q(i, j), rep.cov_bias, se);
    }
  }
  rep.max_mean_z = rep.mean_z.maxCoeff();
  rep.max_cov_z = rep.cov_z.maxCoeff();
  rep.pass = rep.max_mean_z <= z_limit && rep.max_cov_z <= z_limit;
  return rep;
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble) {
  out << "path_id,time,coord,value\n";
  char buf[64];
  for (std::size_t p = 0; p < ensemble.count; ++p) {
    for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
      const Matrix& st = ensemble.states[k];
      for (Eigen::Index i = 0; i < st.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", ensemble.times[k]);
        out << p << ',' << buf << ',' << i << ',';
        std::snprintf(buf, sizeof buf, "%.17g", st(i, static_cast<Eigen::Index>(p)));
        out << buf << '\n';
      }
    }
  }
}

}  // namespace ou
