#include "ou/measures.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "ou/covariance.hpp"
#include "ou/evolution.hpp"
#include "ou/mehler.hpp"
#include "ou/parallel.hpp"
#include "ou/rng.hpp"

namespace ou {

GaussianMeasure::GaussianMeasure(Vector mean, const Matrix& cov) : mean_(std::move(mean)) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size()) {
    throw Error(ErrorCode::BadParameter, "mean and covariance dimensions differ");
  }
  const auto d = clamp_psd(spectral(cov));
  cov_ = symmetrize(cov);
  factor_ = d.eigenvectors * d.eigenvalues.cwiseSqrt().asDiagonal();
}

Complex GaussianMeasure::char_fn(const Vector& h) const {
  return std::polar(std::exp(-0.5 * h.dot(cov_ * h)), mean_.dot(h));
}

Matrix sample(const GaussianMeasure& mu, std::size_t count, std::uint64_t seed, std::string_view label) {
  if (count < 1) throw Error(ErrorCode::BadParameter, "sample count must be >= 1");
  const rng::CounterStream stream(rng::seed_stream(seed, label));
  const auto n = static_cast<std::size_t>(mu.dim());
  Matrix out(mu.dim(), static_cast<Eigen::Index>(count));
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t first = chunk * kChunkSize;
    const std::size_t last = std::min(count, first + kChunkSize);
    Matrix z(mu.dim(), static_cast<Eigen::Index>(last - first));
    rng::fill_normals(stream, first * n, (last - first) * n, z.data());
    out.middleCols(static_cast<Eigen::Index>(first), z.cols()) = (mu.factor() * z).colwise() + mu.mean();
  });
  return out;
}

Complex mean_functional(const GaussianMeasure& mu, const TrigPolynomial& phi) {
  Complex acc = 0.0;
  for (const auto& term : phi.terms()) acc += term.coefficient * mu.char_fn(term.frequency);
  return acc;
}

namespace {

struct KernelCache {
  OperatorFamily model;
  double tol_tail;
  std::mutex mutex;
  std::map<double, Matrix> kernels;

  Matrix get(double t) {
    {
      std::lock_guard lock(mutex);
      auto it = kernels.find(t);
      if (it != kernels.end()) return it->second;
    }
    Matrix q = q_infinity(model, t, tol_tail).Q;
    std::lock_guard lock(mutex);
    return kernels.emplace(t, std::move(q)).first->second;
  }
};

}  // namespace

EvolutionSystem gaussian_system(const OperatorFamily& model, double tol_tail) {
  auto cache = std::make_shared<KernelCache>();
  cache->model = model;
  cache->tol_tail = tol_tail;
  const int n = model.dim;
  return EvolutionSystem{"gamma", [cache, n](double t) { return GaussianMeasure(Vector::Zero(n), cache->get(t)); }};
}

EvolutionSystem shifted_system(const OperatorFamily& model, std::function<Vector(double)> shift, std::string label,
                               double tol_tail) {
  auto base = gaussian_system(model, tol_tail);
  return EvolutionSystem{std::move(label), [base, shift](double t) { return base.measure(t).shifted(shift(t)); }};
}

EvolutionSystem nonunique_shifted_system(const OperatorFamily& model, double tol_tail) {
  if (!model.mode_one_scale) throw Error(ErrorCode::BadParameter, model.name + " has no mode-one scale m_t");
  const auto scale = model.mode_one_scale;
  const int n = model.dim;
  return shifted_system(
      model,
      [scale, n](double t) {
        Vector v = Vector::Zero(n);
        v(0) = scale(t);
        return v;
      },
      "gamma*delta(m_t e1)", tol_tail);
}

std::size_t default_probe_count(int n) { return static_cast<std::size_t>(2 * n + 16); }

std::vector<Vector> make_probes(int n, std::size_t total, std::uint64_t seed) {
  std::vector<Vector> out;
  for (int i = 0; i < n && out.size() < total; ++i) out.push_back(Vector::Unit(n, i));
  for (int i = 0; i + 1 < n && out.size() < total; ++i) out.push_back(Vector::Unit(n, i) + Vector::Unit(n, i + 1));
  if (out.size() < total) out.push_back(Vector::Ones(n));
  const rng::CounterStream stream(rng::seed_stream(seed, "probes"));
  std::uint64_t counter = 0;
  while (out.size() < total) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = stream.normal(counter++);
    out.push_back(v / v.norm());
  }
  return out;
}

InvarianceReport verify_invariance(const EvolutionSystem& system, const OperatorFamily& model,
                                   const std::vector<std::pair<double, double>>& pairs,
                                   const std::vector<Vector>& probes, double tolerance) {
  InvarianceReport report;
  report.system = system.label;
  report.probe_count = probes.size();
  report.tolerance = tolerance > 0.0 ? tolerance : (model.closed_form ? 1e-8 : 1e-6);

  TrigPolynomial dual(model.dim);
  double coefficient_mass = 0.0;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const Complex c = std::polar(1.0 / (1.0 + static_cast<double>(j)), 0.7 * static_cast<double>(j));
    dual.add_term(c, probes[j]);
    coefficient_mass += std::abs(c);
  }

  std::vector<std::vector<InvarianceRow>> rows(pairs.size());
  std::vector<double> dual_gap(pairs.size(), 0.0), agreement(pairs.size(), 0.0);
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [s, t] = pairs[p];
    const Matrix u = evolve(model, s, t).matrix;
    const Matrix q = q_kernel(model, s, t).Q;
    const GaussianMeasure nu_s = system.measure(s);
    const GaussianMeasure nu_t = system.measure(t);
    Complex weighted_gap = 0.0;
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const Vector& h = probes[j];
      InvarianceRow row;
      row.s = s;
      row.t = t;
      row.probe = j;
      row.lhs = nu_t.char_fn(h);
      row.rhs = std::exp(-0.5 * h.dot(q * h)) * nu_s.char_fn(u.transpose() * h);
      row.discrepancy = std::abs(row.lhs - row.rhs);
      weighted_gap += dual.terms()[j].coefficient * (row.rhs - row.lhs);
      rows[p].push_back(row);
    }
    const Complex dual_value = mean_functional(nu_s, transform(dual, u, q)) - mean_functional(nu_t, dual);
    dual_gap[p] = std::abs(dual_value);
    agreement[p] = std::abs(dual_value - weighted_gap);
  });

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (auto& row : rows[p]) {
      report.max_discrepancy = std::max(report.max_discrepancy, row.discrepancy);
      report.rows.push_back(row);
    }
    report.dual_discrepancy = std::max(report.dual_discrepancy, dual_gap[p]);
    report.form_agreement = std::max(report.form_agreement, agreement[p]);
  }
  report.pass = report.max_discrepancy <= report.tolerance &&
                report.dual_discrepancy <= report.tolerance * std::max(1.0, coefficient_mass) &&
                report.form_agreement <= 1e-10;
  return report;
}

ErgodicReport verify_ergodic_limit(const OperatorFamily& model, double t, const Vector& x0,
                                   const std::vector<double>& s_values, const TrigPolynomial& phi,
                                   double tolerance, double tol_tail) {
  if (!model.decay || !(model.decay->zeta > 0.0)) {
    throw Error(ErrorCode::NoDecay, model.name + ": ergodic limit needs a decay rate zeta > 0");
  }
  if (s_values.empty()) throw Error(ErrorCode::BadParameter, "ergodic check needs at least one s");
  const double M = model.decay->M;
  const double zeta = model.decay->zeta;
  const double K = model.noise_bound;

  ErgodicReport report;
  report.t = t;
  report.tolerance = tolerance;
  report.limit = mean_functional(GaussianMeasure(Vector::Zero(model.dim), q_infinity(model, t, tol_tail).Q), phi);

  double amplitude = 0.0;
  for (const auto& term : phi.terms()) {
    const double h = term.frequency.norm();
    amplitude += std::abs(term.coefficient) *
                 (M * x0.norm() * h + std::pow(M, 4) * K * K * h * h / (4.0 * zeta));
  }
  report.monotone = true;
  report.within_schedule = true;
  for (double s : s_values) {
    ErgodicRow row;
    row.s = s;
    row.value = apply_exact(model, s, t, phi, x0);
    row.distance = std::abs(row.value - report.limit);
    row.schedule = amplitude * std::exp(-zeta * (t - s)) + 10.0 * tol_tail;
    if (!report.rows.empty() && row.distance > report.rows.back().distance + 1e-15) report.monotone = false;
    if (row.distance > row.schedule) report.within_schedule = false;
    report.rows.push_back(row);
  }
  report.final_distance = report.rows.back().distance;
  report.pass = report.monotone && report.within_schedule && report.final_distance <= tolerance;
  return report;
}

}  // namespace ou
