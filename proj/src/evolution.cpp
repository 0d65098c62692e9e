#include "ou/evolution.hpp"

#include <cmath>
#include <sstream>

#include "ou/parallel.hpp"

namespace ou {

namespace {

template <typename Rhs>
Matrix rk4_step(const Rhs& rhs, double tau, const Matrix& m, double h) {
  const Matrix k1 = rhs(tau, m);
  const Matrix k2 = rhs(tau + h / 2, m + (h / 2) * k1);
  const Matrix k3 = rhs(tau + h / 2, m + (h / 2) * k2);
  const Matrix k4 = rhs(tau + h, m + h * k3);
  return m + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Classical RK4 with step doubling; the accepted value is the Richardson
// combination of the full and the two half steps.
template <typename Rhs>
void integrate_segment(const Rhs& rhs, double from, double to, Matrix& m, double tol, double scale_hint,
                       EvolutionMap& info) {
  if (to <= from) return;
  double h = std::min(to - from, 0.5 / std::max(1.0, scale_hint));
  double tau = from;
  while (tau < to) {
    if (to - tau < h) h = to - tau;
    const Matrix full = rk4_step(rhs, tau, m, h);
    const Matrix half = rk4_step(rhs, tau + h / 2, rk4_step(rhs, tau, m, h / 2), h / 2);
    const double err = (half - full).cwiseAbs().maxCoeff() / 15.0;
    const double scale = std::max(1.0, half.cwiseAbs().maxCoeff());
    if (!std::isfinite(err) || !half.allFinite()) {
      throw Error(ErrorCode::IntegratorDiverged, "non-finite state at tau = " + std::to_string(tau));
    }
    const double target = tol * scale;
    if (err <= target) {
      m = half + (half - full) / 15.0;
      const double next = tau + h;
      tau = (to - next < 1e-15 * std::max(1.0, std::abs(to))) ? to : next;
      info.step = (info.steps == 0) ? h : std::min(info.step, h);
      ++info.steps;
      h *= (err == 0.0) ? 4.0 : std::min(4.0, 0.9 * std::pow(target / err, 0.2));
    } else {
      h *= std::max(0.1, 0.9 * std::pow(target / err, 0.2));
    }
    if (h < 1e-14 * std::max(1.0, std::abs(tau))) {
      std::ostringstream msg;
      msg << "step underflow at tau = " << tau;
      throw Error(ErrorCode::IntegratorDiverged, msg.str());
    }
  }
}

// Splits [s, t] at history_start, where the frozen coefficients have a kink.
std::vector<double> breakpoints(const OperatorFamily& model, double s, double t) {
  std::vector<double> pts{s};
  if (model.history_start > s && model.history_start < t) pts.push_back(model.history_start);
  pts.push_back(t);
  return pts;
}

double coefficient_scale(const OperatorFamily& model, double s, double t) {
  double scale = 0.0;
  for (int i = 0; i <= 4; ++i) {
    const double tau = s + (t - s) * i / 4.0;
    scale = std::max(scale, model.A(tau).cwiseAbs().rowwise().sum().maxCoeff());
  }
  return scale;
}

}  // namespace

std::string to_string(EvolutionMethod method) {
  switch (method) {
    case EvolutionMethod::ClosedForm: return "closed-form";
    case EvolutionMethod::Quadrature: return "quadrature";
    case EvolutionMethod::Integrated: return "integrated";
  }
  return "unknown";
}

std::string to_string(NormMode mode) {
  return mode == NormMode::OperatorNorm ? "operator" : "cameron-martin";
}

EvolutionMap integrate_forward(const OperatorFamily& model, double s, double t, const EvolveOptions& options) {
  if (options.check_window) model.require_window(s, t);
  EvolutionMap out{s, t, Matrix::Identity(model.dim, model.dim), EvolutionMethod::Integrated, 0.0, 4, 0};
  if (s == t) return out;
  const double scale = coefficient_scale(model, s, t);
  const auto rhs = [&model](double tau, const Matrix& m) -> Matrix { return model.A(tau) * m; };
  const auto pts = breakpoints(model, s, t);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    integrate_segment(rhs, pts[i], pts[i + 1], out.matrix, options.local_tol, scale, out);
  }
  return out;
}

EvolutionMap integrate_adjoint(const OperatorFamily& model, double s, double t, const EvolveOptions& options) {
  if (options.check_window) model.require_window(s, t);
  EvolutionMap out{s, t, Matrix::Identity(model.dim, model.dim), EvolutionMethod::Integrated, 0.0, 4, 0};
  if (s == t) return out;
  const double scale = coefficient_scale(model, s, t);
  const auto rhs = [&model](double tau, const Matrix& v) -> Matrix { return v * model.A_star(tau); };
  const auto pts = breakpoints(model, s, t);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    integrate_segment(rhs, pts[i], pts[i + 1], out.matrix, options.local_tol, scale, out);
  }
  return out;
}

EvolutionMap evolve(const OperatorFamily& model, double s, double t, const EvolveOptions& options) {
  if (options.check_window) model.require_window(s, t);
  if (s > t) throw Error(ErrorCode::BadParameter, "evolve needs s <= t");
  if (s == t) return EvolutionMap{s, t, Matrix::Identity(model.dim, model.dim), EvolutionMethod::ClosedForm};
  if (model.is_diagonal()) {
    Vector d(model.dim);
    for (int k = 1; k <= model.dim; ++k) d(k - 1) = std::exp(model.a_integral(k, s, t));
    const auto method =
        model.diagonal().a_integral ? EvolutionMethod::ClosedForm : EvolutionMethod::Quadrature;
    return EvolutionMap{s, t, d.asDiagonal(), method};
  }
  const auto& dense = model.dense();
  if (dense.evolution) {
    // closed forms are given in terms of the unfrozen coefficients
    if (s >= model.history_start) {
      return EvolutionMap{s, t, dense.evolution(s, t), EvolutionMethod::ClosedForm};
    }
  }
  ResultCache::Entry hit;
  if (model.cache.find(ResultCache::Evolution, s, t, options.local_tol, 0.0, hit)) {
    EvolutionMap out{s, t, std::move(hit.value), EvolutionMethod::Integrated, hit.aux, 4, hit.count};
    return out;
  }
  EvolveOptions inner = options;
  inner.check_window = false;
  EvolutionMap out = integrate_forward(model, s, t, inner);
  model.cache.store(ResultCache::Evolution, s, t, options.local_tol, 0.0, {out.matrix, out.steps, out.step});
  return out;
}

EvolutionMap adjoint_evolve(const OperatorFamily& model, double s, double t, const EvolveOptions& options) {
  EvolutionMap out = evolve(model, s, t, options);
  out.matrix.transposeInPlace();
  return out;
}

double measured_norm(const OperatorFamily& model, double s, double t, NormMode mode) {
  const Matrix u = evolve(model, s, t).matrix;
  if (mode == NormMode::OperatorNorm) return spectral_norm(u);
  const Matrix root_s = sqrt_psd(model.Q(s));
  const CameronMartinMetric target(sqrt_psd(model.Q(t)));
  const Matrix mapped = u * root_s;
  for (Eigen::Index j = 0; j < mapped.cols(); ++j) {
    if (!target.in_range(mapped.col(j), 1e-8)) {
      std::ostringstream msg;
      msg << "U(" << t << ", " << s << ") does not map H_s into H_t";
      throw Error(ErrorCode::FitFailed, msg.str());
    }
  }
  return spectral_norm(Matrix(target.pseudo_inverse() * mapped));
}

double DecayCertificate::evaluate(double tau) const {
  if (mode == NormMode::OperatorNorm) return M * std::exp(-zeta * tau);
  return C * std::exp(-eta * tau) / std::pow(tau, alpha);
}

std::vector<std::pair<double, double>> ordered_pairs(const std::vector<double>& s_values,
                                                     const std::vector<double>& t_values) {
  std::vector<std::pair<double, double>> out;
  for (double s : s_values) {
    for (double t : t_values) {
      if (s < t) out.emplace_back(s, t);
    }
  }
  return out;
}

DecayCertificate fit_decay(const OperatorFamily& model, const std::vector<std::pair<double, double>>& grid,
                           NormMode mode) {
  if (grid.empty()) throw Error(ErrorCode::BadParameter, "decay fit needs a nonempty grid");
  for (const auto& [s, t] : grid) {
    if (!(t > s)) throw Error(ErrorCode::BadParameter, "decay fit grid must have s < t");
    model.require_window(s, t);
  }
  DecayCertificate cert;
  cert.mode = mode;
  cert.grid = grid;
  cert.measured.assign(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    cert.measured[i] = measured_norm(model, grid[i].first, grid[i].second, mode);
  });

  const auto m = static_cast<Eigen::Index>(grid.size());
  Vector y(m), tau(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double n = cert.measured[i];
    if (!(n > 0.0) || !std::isfinite(n)) {
      std::ostringstream msg;
      msg << "measured norm " << n << " at (" << grid[i].first << ", " << grid[i].second << ")";
      throw Error(ErrorCode::FitFailed, msg.str());
    }
    y(i) = std::log(n);
    tau(i) = grid[i].second - grid[i].first;
  }

  std::vector<double> distinct(tau.data(), tau.data() + m);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
                 distinct.end());

  double log_c = 0.0, rate = 0.0, alpha = 0.0;
  auto fit_two = [&](double fixed_alpha) {
    Matrix design(m, 2);
    design.col(0).setOnes();
    design.col(1) = -tau;
    const Vector rhs = y + fixed_alpha * tau.array().log().matrix();
    const Vector coef = design.colPivHouseholderQr().solve(rhs);
    log_c = coef(0);
    rate = coef(1);
  };

  if (distinct.size() == 1) {
    log_c = 0.0;
    rate = -y.mean() / tau(0);
  } else if (mode == NormMode::OperatorNorm || distinct.size() == 2) {
    fit_two(0.0);
  } else {
    Matrix design(m, 3);
    design.col(0).setOnes();
    design.col(1) = -tau;
    design.col(2) = -tau.array().log().matrix();
    const Vector coef = design.colPivHouseholderQr().solve(y);
    alpha = std::clamp(coef(2), 0.0, 0.5 - 1e-9);
    if (alpha < 1e-3) alpha = 0.0;
    fit_two(alpha);
  }

  Vector residual(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    residual(i) = y(i) - (log_c - rate * tau(i) - alpha * std::log(tau(i)));
  }
  cert.residual = std::sqrt(residual.squaredNorm() / static_cast<double>(m));

  if (mode == NormMode::OperatorNorm) {
    cert.M = std::exp(log_c);
    cert.zeta = rate;
  } else {
    cert.C = std::exp(log_c);
    cert.eta = rate;
    cert.alpha = alpha;
  }
  double worst = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) worst = std::max(worst, cert.measured[i] / cert.evaluate(tau(i)));
  if (mode == NormMode::OperatorNorm) {
    cert.M *= worst;
  } else {
    cert.C *= worst;
  }
  cert.bound.resize(grid.size());
  cert.sound = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    cert.bound[i] = cert.evaluate(tau(i));
    cert.sound = cert.sound && cert.measured[i] <= cert.bound[i] * (1.0 + cert.fit_slack);
  }
  return cert;
}

}  // namespace ou
