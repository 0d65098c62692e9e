#include "ou/mehler.hpp"

#include <cmath>

#include "ou/covariance.hpp"
#include "ou/parallel.hpp"

namespace ou {

namespace {

const Complex kI(0.0, 1.0);

struct Transition {
  Matrix u;
  Matrix q;
};

Transition transition(const OperatorFamily& model, double s, double t) {
  return Transition{evolve(model, s, t).matrix, q_kernel(model, s, t).Q};
}

Complex evaluate_transformed(const Transition& tr, const TrigPolynomial& phi, const Vector& x) {
  return transform(phi, tr.u, tr.q)(x);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  const double n = static_cast<double>(values.size());
  for (double v : values) m.mean += v;
  m.mean /= n;
  if (values.size() > 1) {
    for (double v : values) m.variance += (v - m.mean) * (v - m.mean);
    m.variance /= n - 1.0;
  }
  return m;
}

}  // namespace

TrigPolynomial transformed(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi) {
  const auto tr = transition(model, s, t);
  return transform(phi, tr.u, tr.q);
}

Complex apply_exact(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi, const Vector& x) {
  return transformed(model, s, t, phi)(x);
}

MCEstimate sample_mean(const Matrix& samples, const std::function<double(const Vector&)>& f) {
  const auto count = static_cast<std::size_t>(samples.cols());
  std::vector<double> values(count);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t last = std::min(count, (chunk + 1) * kChunkSize);
    for (std::size_t j = chunk * kChunkSize; j < last; ++j) {
      values[j] = f(samples.col(static_cast<Eigen::Index>(j)));
    }
  });
  const auto m = moments(values);
  MCEstimate out;
  out.value = m.mean;
  out.std_error = std::sqrt(m.variance / static_cast<double>(count));
  out.count = count;
  return out;
}

MCEstimate apply_mc(const OperatorFamily& model, double s, double t, const std::function<double(const Vector&)>& phi,
                    const Vector& x, std::size_t count, std::uint64_t seed) {
  const auto tr = transition(model, s, t);
  const GaussianMeasure law(tr.u * x, tr.q);
  MCEstimate out = sample_mean(sample(law, count, seed, "apply_mc"), phi);
  out.seed = seed;
  return out;
}

Complex generator_apply(const OperatorFamily& model, double r, const TrigPolynomial& phi, const Vector& x) {
  const Matrix a_star = model.A_star(r);
  const Matrix q = model.Q(r);
  Complex acc = 0.0;
  for (const auto& term : phi.terms()) {
    const Vector& h = term.frequency;
    const Complex factor = kI * x.dot(a_star * h) - 0.5 * h.dot(q * h);
    acc += factor * term.coefficient * std::polar(1.0, x.dot(h));
  }
  return acc;
}

double generator_apply(const OperatorFamily& model, double r, const CylindricalFunction& phi, const Vector& x) {
  const Matrix& dirs = phi.directions;
  const Vector u = phi.project(x);
  const Matrix projected_q = dirs.transpose() * model.Q(r) * dirs;
  const double diffusion = 0.5 * (projected_q.cwiseProduct(phi.profile_hessian(u))).sum();
  const Vector drift = dirs.transpose() * (model.A(r) * x);  // <x, A^T h_i>
  return diffusion + drift.dot(phi.profile_gradient(u));
}

Complex transported_generator(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi,
                              const Vector& x) {
  const auto tr = transition(model, s, t);
  const Matrix a_star = model.A_star(t);
  const Matrix q_t = model.Q(t);
  Complex acc = 0.0;
  for (const auto& term : phi.terms()) {
    const Vector& h = term.frequency;
    const Vector g = a_star * h;
    const Vector uh = tr.u.transpose() * h;
    const Complex bracket = kI * x.dot(tr.u.transpose() * g) - h.dot(tr.q * g) - 0.5 * h.dot(q_t * h);
    acc += bracket * term.coefficient * std::exp(-0.5 * h.dot(tr.q * h)) * std::polar(1.0, x.dot(uh));
  }
  return acc;
}

Complex transported_generator_numeric(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi,
                                      const Vector& x, double eps) {
  const auto tr = transition(model, s, t);
  const Matrix a_star = model.A_star(t);
  const Matrix q_t = model.Q(t);
  Complex acc = 0.0;
  for (const auto& term : phi.terms()) {
    const Vector& h = term.frequency;
    const Vector g = a_star * h;
    const double step = eps / std::max(1.0, g.norm());
    auto shifted = [&](double e) {
      return evaluate_transformed(tr, TrigPolynomial::exponential(Vector(h + e * g)), x);
    };
    // P_{s,t}(i<., g> e^{i<., h>}) = d/de P_{s,t} e^{i<., h + e g>} at e = 0
    const Complex derivative =
        (8.0 * (shifted(step) - shifted(-step)) - (shifted(2 * step) - shifted(-2 * step))) / (12.0 * step);
    acc += term.coefficient * (derivative - 0.5 * h.dot(q_t * h) * shifted(0.0));
  }
  return acc;
}

DifferentiationReport check_differentiation(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi,
                                            const Vector& x, double fd_step) {
  if (!(s < t) || !(fd_step > 0.0) || s + 2 * fd_step >= t) {
    throw Error(ErrorCode::BadParameter, "differentiation check needs s + 2 fd_step < t");
  }
  DifferentiationReport rep;
  rep.fd_step = fd_step;
  rep.formula_s = -generator_apply(model, s, transformed(model, s, t, phi), x);
  rep.formula_t = transported_generator(model, s, t, phi, x);

  auto central_s = [&](double d) {
    return (apply_exact(model, s + d, t, phi, x) - apply_exact(model, s - d, t, phi, x)) / (2.0 * d);
  };
  auto central_t = [&](double d) {
    return (apply_exact(model, s, t + d, phi, x) - apply_exact(model, s, t - d, phi, x)) / (2.0 * d);
  };
  rep.fd_s = central_s(fd_step);
  rep.fd_t = central_t(fd_step);
  rep.discrepancy_s = std::abs(rep.fd_s - rep.formula_s);
  rep.discrepancy_t = std::abs(rep.fd_t - rep.formula_t);
  rep.discrepancy_s_half = std::abs(central_s(fd_step / 2) - rep.formula_s);
  rep.discrepancy_t_half = std::abs(central_t(fd_step / 2) - rep.formula_t);
  rep.ratio_s = rep.discrepancy_s_half > 0.0 ? rep.discrepancy_s / rep.discrepancy_s_half : 0.0;
  rep.ratio_t = rep.discrepancy_t_half > 0.0 ? rep.discrepancy_t / rep.discrepancy_t_half : 0.0;
  return rep;
}

GradientEstimateReport gradient_estimate_check(const OperatorFamily& model, double s, double t,
                                               const SmoothObservable& phi, const Vector& x, double norm_factor,
                                               std::size_t count, std::uint64_t seed) {
  const auto tr = transition(model, s, t);
  const Matrix samples = sample(GaussianMeasure(tr.u * x, tr.q), count, seed, "gradient");
  const Matrix root_s = sqrt_psd(model.Q(s));
  const Matrix root_t = sqrt_psd(model.Q(t));
  const Matrix left = root_s * tr.u.transpose();

  Matrix w(model.dim, samples.cols());
  std::vector<double> r(count);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t last = std::min(count, (chunk + 1) * kChunkSize);
    for (std::size_t j = chunk * kChunkSize; j < last; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      const Vector g = phi.gradient(samples.col(col));
      w.col(col) = left * g;
      r[j] = (root_t * g).norm();
    }
  });

  GradientEstimateReport rep;
  rep.count = count;
  rep.norm_factor = norm_factor;
  const double n = static_cast<double>(count);
  const Vector mean = w.rowwise().sum() / n;
  const Matrix centered = w.colwise() - mean;
  const Matrix cov = (count > 1) ? Matrix(centered * centered.transpose() / (n - 1.0)) : Matrix::Zero(model.dim, model.dim);
  rep.lhs = mean.norm();
  if (rep.lhs > 0.0) {
    const Vector unit = mean / rep.lhs;
    rep.lhs_stderr = std::sqrt(std::max(0.0, unit.dot(cov * unit)) / n);
  } else {
    rep.lhs_stderr = std::sqrt(cov.trace() / n);
  }
  const auto m = moments(r);
  rep.rhs = norm_factor * m.mean;
  rep.rhs_stderr = norm_factor * std::sqrt(m.variance / n);
  rep.pass = rep.lhs <= rep.rhs + 3.0 * std::hypot(rep.lhs_stderr, rep.rhs_stderr) + 1e-14;
  return rep;
}

}  // namespace ou
