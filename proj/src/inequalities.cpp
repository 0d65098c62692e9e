#include "ou/inequalities.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ou/covariance.hpp"
#include "ou/measures.hpp"
#include "ou/parallel.hpp"
#include "ou/quadrature.hpp"
#include "ou/rng.hpp"

namespace ou {

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Report: return "REPORT";
  }
  return "FAIL";
}

double kappa(double C, double eta, double alpha) {
  if (!(alpha >= 0.0 && alpha < 0.5)) {
    throw Error(ErrorCode::BadCertificate, "alpha must lie in [0, 1/2), got " + std::to_string(alpha));
  }
  if (!(eta > 0.0) || !(C > 0.0)) throw Error(ErrorCode::BadCertificate, "C and eta must be > 0");
  return C * std::pow(2.0 * eta, 2.0 * alpha - 1.0) * std::tgamma(1.0 - 2.0 * alpha);
}

double kappa(const DecayCertificate& cert) {
  if (cert.mode != NormMode::CameronMartin) {
    throw Error(ErrorCode::BadCertificate, "kappa needs a Cameron-Martin certificate");
  }
  return kappa(cert.C, cert.eta, cert.alpha);
}

double p_max(double q, double tau, double kappa) {
  if (!(q > 1.0) || !(kappa > 0.0) || tau < 0.0) throw Error(ErrorCode::BadParameter, "p_max needs q > 1, kappa > 0");
  return (q - 1.0) * std::exp(tau / (2.0 * kappa)) + 1.0;
}

namespace {

struct EntropyTerms {
  double f_log_f = 0.0;
  double f = 0.0;
  double energy = 0.0;
};

// |phi|^p, |phi|^p log |phi|^p and |phi|^{p-2} ||Q(t)^{1/2} grad phi||^2 at one point,
// in terms of the profile value and the projected gradient.
EntropyTerms pointwise(double value, const Vector& dpsi, const Matrix& projected_q, double p, double reg) {
  EntropyTerms e;
  double v = value;
  Vector g = dpsi;
  if (reg > 0.0) {
    const double smooth = std::sqrt(v * v + reg * reg);
    g = dpsi * (v / smooth);
    v = smooth;
  }
  const double a = std::abs(v);
  if (a == 0.0) return e;
  e.f = std::pow(a, p);
  e.f_log_f = e.f * std::log(e.f);
  e.energy = std::pow(a, p - 2.0) * g.dot(projected_q * g);
  return e;
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

// f log(f/m): integrates to the entropy when m is the mean of f, and cancels
// exactly for constant f.
double relative_entropy_density(double f, double m) { return f > 0.0 ? f * std::log(f / m) : 0.0; }

// Rounding allowance of the entropy sum: a few ulps of m (1 + |log m|) with m
// bounded by the largest |phi|^p on the quadrature grid.
double rounding_floor(const CylindricalFunction& phi, const Matrix& gamma_cov, double p) {
  const Vector zero = Vector::Zero(phi.active());
  double top = 0.0;
  for_each_gaussian_node(zero, phi.directions.transpose() * gamma_cov * phi.directions, 8,
                         [&](const Vector& u, double) { top = std::max(top, std::pow(std::abs(phi.profile(u)), p)); });
  return 64.0 * kEps * top * (1.0 + std::abs(std::log(std::max(top, 1e-300))));
}

}  // namespace

LogSobolevReport entropy_gap(const OperatorFamily& model, double t, const Matrix& gamma_cov,
                             const CylindricalFunction& phi, double p, double kappa, const EntropyMethod& method) {
  if (!(p > 1.0)) throw Error(ErrorCode::BadParameter, "entropy check needs p > 1");
  LogSobolevReport rep;
  rep.t = t;
  rep.p = p;
  rep.phi = phi.name;
  rep.kappa = kappa;
  const Matrix& dirs = phi.directions;
  const Matrix projected_q = dirs.transpose() * model.Q(t) * dirs;
  const double scale = kappa * p * p;

  if (method.kind == EntropyMethod::Kind::Quadrature) {
    if (phi.active() > 2) throw Error(ErrorCode::BadParameter, "quadrature entropy supports at most two directions");
    rep.method = "quadrature";
    const Matrix cov = dirs.transpose() * gamma_cov * dirs;
    const Vector zero = Vector::Zero(phi.active());
    auto evaluate = [&](int nodes, double& lhs, double& rhs) {
      std::vector<std::pair<EntropyTerms, double>> points;
      for_each_gaussian_node(zero, cov, nodes, [&](const Vector& u, double w) {
        points.emplace_back(pointwise(phi.profile(u), phi.profile_gradient(u), projected_q, p, method.regularization),
                            w);
      });
      double m = 0.0, energy = 0.0;
      for (const auto& [e, w] : points) {
        m += w * e.f;
        energy += w * e.energy;
      }
      if (!(m > 0.0)) throw Error(ErrorCode::NonPositiveMean, phi.name + ": mean of |phi|^p is not positive");
      lhs = 0.0;
      for (const auto& [e, w] : points) lhs += w * relative_entropy_density(e.f, m);
      rhs = scale * energy;
    };
    double lhs_check = 0.0, rhs_check = 0.0;
    evaluate(method.nodes, rep.lhs, rep.rhs);
    evaluate(method.check_nodes, lhs_check, rhs_check);
    rep.lhs_error = std::abs(rep.lhs - lhs_check) + 1e-14 * std::abs(rep.lhs);
    rep.rhs_error = std::abs(rep.rhs - rhs_check) + 1e-14 * std::abs(rep.rhs);
    rep.lhs_error += rounding_floor(phi, gamma_cov, p);
  } else {
    rep.method = "monte-carlo";
    const Matrix xs = sample(GaussianMeasure(Vector::Zero(model.dim), gamma_cov), method.count, method.seed, "logsob");
    const std::size_t count = method.count;
    std::vector<EntropyTerms> terms(count);
    parallel_for(chunk_count(count), [&](std::size_t chunk) {
      const std::size_t last = std::min(count, (chunk + 1) * kChunkSize);
      for (std::size_t j = chunk * kChunkSize; j < last; ++j) {
        const Vector u = phi.project(xs.col(static_cast<Eigen::Index>(j)));
        terms[j] = pointwise(phi.profile(u), phi.profile_gradient(u), projected_q, p, method.regularization);
      }
    });
    const double n = static_cast<double>(count);
    EntropyTerms mean;
    double carry = 0.0;  // Neumaier compensation for the mean of f
    for (const auto& e : terms) {
      const double next = mean.f + e.f;
      carry += std::abs(mean.f) >= std::abs(e.f) ? (mean.f - next) + e.f : (e.f - next) + mean.f;
      mean.f = next;
      mean.f_log_f += e.f_log_f;
      mean.energy += e.energy;
    }
    mean.f += carry;
    mean.f /= n;
    mean.f_log_f /= n;
    mean.energy /= n;
    if (!(mean.f > 0.0)) throw Error(ErrorCode::NonPositiveMean, phi.name + ": mean of |phi|^p is not positive");
    const double log_m = std::log(mean.f);
    double lhs = 0.0;
    for (const auto& e : terms) lhs += relative_entropy_density(e.f, mean.f);
    rep.lhs = lhs / n;
    rep.rhs = scale * mean.energy;
    // delta method: d(LHS) = d(f log f) - (log m + 1) d(f)
    double var_lhs = 0.0, var_rhs = 0.0;
    for (const auto& e : terms) {
      const double g = (e.f_log_f - mean.f_log_f) - (log_m + 1.0) * (e.f - mean.f);
      var_lhs += g * g;
      var_rhs += (e.energy - mean.energy) * (e.energy - mean.energy);
    }
    rep.lhs_error = std::sqrt(var_lhs / (n - 1.0) / n) + 64.0 * kEps * mean.f * (1.0 + std::abs(log_m));
    rep.rhs_error = scale * std::sqrt(var_rhs / (n - 1.0) / n);
  }
  rep.slack = rep.rhs - rep.lhs;
  rep.error = std::hypot(rep.lhs_error, rep.rhs_error);
  rep.verdict = rep.slack >= -3.0 * rep.error ? Verdict::Pass : Verdict::Fail;
  return rep;
}

namespace {

CylindricalFunction one_d(std::string name, const Vector& h, std::function<double(double)> f,
                          std::function<double(double)> df, std::function<double(double)> d2f) {
  Matrix dirs = h / h.norm();
  return CylindricalFunction(
      std::move(name), [f](const Vector& u) { return f(u(0)); },
      [df](const Vector& u) { return Vector::Constant(1, df(u(0))); },
      [d2f](const Vector& u) { return Matrix::Constant(1, 1, d2f(u(0))); }, dirs);
}

Matrix two_dirs(int n, int i, int j) {
  Matrix d = Matrix::Zero(n, 2);
  d(i, 0) = 1.0;
  d(j, 1) = 1.0;
  return d;
}

}  // namespace

std::vector<CylindricalFunction> logsob_probe_suite(int n) {
  if (n < 2) throw Error(ErrorCode::BadParameter, "probe suite needs n >= 2");
  const Vector e1 = Vector::Unit(n, 0);
  const Vector diag = (Vector::Unit(n, 0) + Vector::Unit(n, 1)) / std::sqrt(2.0);
  const Vector last = Vector::Unit(n, n - 1);
  std::vector<CylindricalFunction> suite;

  suite.push_back(one_d(
      "const3", e1, [](double) { return 3.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }));
  suite.push_back(one_d(
      "2+cos(x1)", e1, [](double u) { return 2.0 + std::cos(u); }, [](double u) { return -std::sin(u); },
      [](double u) { return -std::cos(u); }));
  suite.push_back(one_d(
      "2+sin(<x,d>)", diag, [](double u) { return 2.0 + std::sin(u); }, [](double u) { return std::cos(u); },
      [](double u) { return -std::sin(u); }));
  suite.push_back(one_d(
      "exp(-x1^2/4)", e1, [](double u) { return std::exp(-u * u / 4.0); },
      [](double u) { return -u / 2.0 * std::exp(-u * u / 4.0); },
      [](double u) { return (u * u / 4.0 - 0.5) * std::exp(-u * u / 4.0); }));
  suite.push_back(one_d(
      "3+tanh(x1)", e1, [](double u) { return 3.0 + std::tanh(u); },
      [](double u) { return 1.0 / std::pow(std::cosh(u), 2); },
      [](double u) { return -2.0 * std::tanh(u) / std::pow(std::cosh(u), 2); }));
  suite.push_back(one_d(
      "1/(1+xn^2)", last, [](double u) { return 1.0 / (1.0 + u * u); },
      [](double u) { return -2.0 * u / std::pow(1.0 + u * u, 2); },
      [](double u) { return (6.0 * u * u - 2.0) / std::pow(1.0 + u * u, 3); }));
  suite.push_back(one_d(
      "exp(sin(x1))", e1, [](double u) { return std::exp(std::sin(u)); },
      [](double u) { return std::cos(u) * std::exp(std::sin(u)); },
      [](double u) { return (std::cos(u) * std::cos(u) - std::sin(u)) * std::exp(std::sin(u)); }));
  suite.push_back(one_d(
      "log(3+cos(2x1))", e1, [](double u) { return std::log(3.0 + std::cos(2.0 * u)); },
      [](double u) { return -2.0 * std::sin(2.0 * u) / (3.0 + std::cos(2.0 * u)); },
      [](double u) {
        const double c = 3.0 + std::cos(2.0 * u);
        return (-4.0 * std::cos(2.0 * u) * c - 4.0 * std::pow(std::sin(2.0 * u), 2)) / (c * c);
      }));
  suite.push_back(one_d(
      "1+x1^2/(1+x1^2)", e1, [](double u) { return 1.0 + u * u / (1.0 + u * u); },
      [](double u) { return 2.0 * u / std::pow(1.0 + u * u, 2); },
      [](double u) { return (2.0 - 6.0 * u * u) / std::pow(1.0 + u * u, 3); }));

  const Matrix d12 = two_dirs(n, 0, 1);
  suite.emplace_back(
      "2+cos(x1)cos(x2)", [](const Vector& u) { return 2.0 + std::cos(u(0)) * std::cos(u(1)); },
      [](const Vector& u) {
        Vector g(2);
        g << -std::sin(u(0)) * std::cos(u(1)), -std::cos(u(0)) * std::sin(u(1));
        return g;
      },
      [](const Vector& u) {
        Matrix h(2, 2);
        h << -std::cos(u(0)) * std::cos(u(1)), std::sin(u(0)) * std::sin(u(1)), std::sin(u(0)) * std::sin(u(1)),
            -std::cos(u(0)) * std::cos(u(1));
        return h;
      },
      d12);
  suite.emplace_back(
      "exp(-(x1^2+x2^2)/8)", [](const Vector& u) { return std::exp(-u.squaredNorm() / 8.0); },
      [](const Vector& u) { return Vector(-u / 4.0 * std::exp(-u.squaredNorm() / 8.0)); },
      [](const Vector& u) {
        const double e = std::exp(-u.squaredNorm() / 8.0);
        return Matrix((u * u.transpose() / 16.0 - Matrix::Identity(2, 2) / 4.0) * e);
      },
      d12);
  suite.emplace_back(
      "2+tanh(x1-x2)", [](const Vector& u) { return 2.0 + std::tanh(u(0) - u(1)); },
      [](const Vector& u) {
        const double s = 1.0 / std::pow(std::cosh(u(0) - u(1)), 2);
        Vector g(2);
        g << s, -s;
        return g;
      },
      [](const Vector& u) {
        const double c = -2.0 * std::tanh(u(0) - u(1)) / std::pow(std::cosh(u(0) - u(1)), 2);
        Matrix h(2, 2);
        h << c, -c, -c, c;
        return h;
      },
      d12);
  suite.emplace_back(
      "1+exp(-x1^2)(1+sin(x2)/2)",
      [](const Vector& u) { return 1.0 + std::exp(-u(0) * u(0)) * (1.0 + 0.5 * std::sin(u(1))); },
      [](const Vector& u) {
        const double e = std::exp(-u(0) * u(0));
        Vector g(2);
        g << -2.0 * u(0) * e * (1.0 + 0.5 * std::sin(u(1))), 0.5 * e * std::cos(u(1));
        return g;
      },
      [](const Vector& u) {
        const double e = std::exp(-u(0) * u(0));
        const double s = 1.0 + 0.5 * std::sin(u(1));
        Matrix h(2, 2);
        h << (4.0 * u(0) * u(0) - 2.0) * e * s, -u(0) * e * std::cos(u(1)), -u(0) * e * std::cos(u(1)),
            -0.5 * e * std::sin(u(1));
        return h;
      },
      d12);
  suite.emplace_back(
      "1.5+sin(x1)cos(xn)/2",
      [](const Vector& u) { return 1.5 + 0.5 * std::sin(u(0)) * std::cos(u(1)); },
      [](const Vector& u) {
        Vector g(2);
        g << 0.5 * std::cos(u(0)) * std::cos(u(1)), -0.5 * std::sin(u(0)) * std::sin(u(1));
        return g;
      },
      [](const Vector& u) {
        Matrix h(2, 2);
        const double off = -0.5 * std::cos(u(0)) * std::sin(u(1));
        h << -0.5 * std::sin(u(0)) * std::cos(u(1)), off, off, -0.5 * std::sin(u(0)) * std::cos(u(1));
        return h;
      },
      two_dirs(n, 0, n - 1));
  return suite;
}

double HyperReport::error() const { return std::hypot(lhs_error, rhs_error); }

HyperInput hyper_input(const OperatorFamily& model, double s, double t, double tol_tail) {
  HyperInput in;
  in.gamma_s = q_infinity(model, s, tol_tail).Q;
  in.gamma_t = q_infinity(model, t, tol_tail).Q;
  in.u = evolve(model, s, t).matrix;
  in.q = q_kernel(model, s, t).Q;
  return in;
}

namespace {

struct NormEstimate {
  double value = 0.0;
  double error = 0.0;
};

// (mean |f|^p)^{1/p} from per-sample values of |f|^p, with delta-method error.
NormEstimate lp_norm(const std::vector<double>& powered, double p) {
  const double n = static_cast<double>(powered.size());
  double mean = 0.0;
  for (double v : powered) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : powered) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  NormEstimate out;
  out.value = std::pow(mean, 1.0 / p);
  out.error = (mean > 0.0) ? out.value / (p * mean) * std::sqrt(var / n) : 0.0;
  return out;
}

template <typename Profile>
NormEstimate quadrature_norm(Profile&& f, const Matrix& cov, double q, int nodes, int check_nodes) {
  auto run = [&](int m) {
    double acc = 0.0;
    for_each_gaussian_node(Vector::Zero(cov.rows()), cov, m, [&](const Vector& u, double w) {
      acc += w * std::pow(std::abs(f(u)), q);
    });
    return std::pow(acc, 1.0 / q);
  };
  NormEstimate out;
  out.value = run(nodes);
  out.error = std::abs(out.value - run(check_nodes)) + 1e-14 * out.value;
  return out;
}

Matrix standard_normals(int n, std::size_t count, std::uint64_t seed) {
  const rng::CounterStream stream(rng::seed_stream(seed, "hyper"));
  Matrix z(n, static_cast<Eigen::Index>(count));
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t first = chunk * kChunkSize;
    const std::size_t last = std::min(count, first + kChunkSize);
    rng::fill_normals(stream, first * n, (last - first) * n, z.col(static_cast<Eigen::Index>(first)).data());
  });
  return z;
}

Matrix factor_of(const Matrix& cov) { return GaussianMeasure(Vector::Zero(cov.rows()), cov).factor(); }

Verdict hyper_verdict(const HyperReport& rep, bool asserted) {
  if (rep.p > rep.p_max * (1.0 + 1e-12)) return asserted ? Verdict::Fail : Verdict::Report;
  return rep.lhs <= rep.rhs + 3.0 * rep.error() + 1e-14 ? Verdict::Pass : Verdict::Fail;
}

void check_exponents(double s, double t, double q, double p) {
  if (!(q > 1.0) || !(p >= 1.0) || !(s < t)) throw Error(ErrorCode::BadParameter, "hyper check needs q > 1, p >= 1, s < t");
}

}  // namespace

HyperReport hyper_check(const HyperInput& in, double s, double t, double q, double p, const TrigPolynomial& phi,
                        const std::string& name, double kappa, const HyperOptions& options) {
  check_exponents(s, t, q, p);
  HyperReport rep;
  rep.s = s;
  rep.t = t;
  rep.q = q;
  rep.p = p;
  rep.kappa = kappa;
  rep.p_max = p_max(q, t - s, kappa);
  rep.phi = name;

  const int n = phi.dim();
  const std::size_t count = options.outer;
  const Matrix z = standard_normals(n, count, options.seed);
  const Matrix xs = factor_of(in.gamma_s) * z;
  const TrigPolynomial moved = transform(phi, in.u, in.q);

  std::vector<double> powered(count);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t last = std::min(count, (chunk + 1) * kChunkSize);
    for (std::size_t j = chunk * kChunkSize; j < last; ++j) {
      powered[j] = std::pow(std::abs(moved(xs.col(static_cast<Eigen::Index>(j)))), p);
    }
  });
  const auto lhs = lp_norm(powered, p);
  rep.lhs = lhs.value;
  rep.lhs_error = lhs.error;

  const Matrix basis = phi.frequency_basis();
  if (basis.cols() == 0) {
    rep.rhs = phi.size() ? std::abs(phi(Vector::Zero(n))) : 0.0;
    rep.rhs_method = "exact";
  } else if (basis.cols() <= 2) {
    // phi(x) depends on x only through basis^T x
    std::vector<std::pair<Complex, Vector>> reduced;
    for (const auto& term : phi.terms()) reduced.emplace_back(term.coefficient, basis.transpose() * term.frequency);
    auto profile = [&](const Vector& u) {
      Complex acc = 0.0;
      for (const auto& [c, g] : reduced) acc += c * std::polar(1.0, u.dot(g));
      return acc;
    };
    const auto rhs = quadrature_norm(profile, Matrix(basis.transpose() * in.gamma_t * basis), q, options.rhs_nodes,
                                     options.rhs_check_nodes);
    rep.rhs = rhs.value;
    rep.rhs_error = rhs.error;
    rep.rhs_method = "quadrature";
  } else {
    // common random numbers: y = F_t z with the outer normals
    const Matrix ys = factor_of(in.gamma_t) * z;
    std::vector<double> rhs_powered(count);
    parallel_for(chunk_count(count), [&](std::size_t chunk) {
      const std::size_t last = std::min(count, (chunk + 1) * kChunkSize);
      for (std::size_t j = chunk * kChunkSize; j < last; ++j) {
        rhs_powered[j] = std::pow(std::abs(phi(ys.col(static_cast<Eigen::Index>(j)))), q);
      }
    });
    const auto rhs = lp_norm(rhs_powered, q);
    rep.rhs = rhs.value;
    rep.rhs_error = rhs.error;
    rep.rhs_method = "monte-carlo";
  }
  rep.verdict = hyper_verdict(rep, options.asserted);
  return rep;
}

HyperReport hyper_check(const HyperInput& in, double s, double t, double q, double p, const CylindricalFunction& phi,
                        double kappa, const HyperOptions& options) {
  check_exponents(s, t, q, p);
  HyperReport rep;
  rep.s = s;
  rep.t = t;
  rep.q = q;
  rep.p = p;
  rep.kappa = kappa;
  rep.p_max = p_max(q, t - s, kappa);
  rep.phi = phi.name;
  if (phi.active() > 2) throw Error(ErrorCode::BadParameter, "cylindrical hyper check supports at most two directions");

  const Matrix& dirs = phi.directions;
  const std::size_t count = options.outer;
  const Matrix z = standard_normals(phi.dim(), count, options.seed);
  const Matrix xs = factor_of(in.gamma_s) * z;
  const Matrix inner_cov = dirs.transpose() * in.q * dirs;
  const Matrix moved_dirs = in.u.transpose() * dirs;  // <Ux, h_i> = <x, U^T h_i>

  std::vector<double> powered(count);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    const std::size_t last = std::min(count, (chunk + 1) * kChunkSize);
    for (std::size_t j = chunk * kChunkSize; j < last; ++j) {
      const Vector center = moved_dirs.transpose() * xs.col(static_cast<Eigen::Index>(j));
      const double value = gaussian_expectation(phi.profile, center, inner_cov, options.inner_nodes);
      powered[j] = std::pow(std::abs(value), p);
    }
  });
  const auto lhs = lp_norm(powered, p);
  rep.lhs = lhs.value;
  rep.lhs_error = lhs.error;

  const auto rhs = quadrature_norm(phi.profile, Matrix(dirs.transpose() * in.gamma_t * dirs), q, options.rhs_nodes,
                                   options.rhs_check_nodes);
  rep.rhs = rhs.value;
  rep.rhs_error = rhs.error;
  rep.rhs_method = "quadrature";
  rep.verdict = hyper_verdict(rep, options.asserted);
  return rep;
}

std::vector<NamedTrig> hyper_probe_suite(int n) {
  if (n < 2) throw Error(ErrorCode::BadParameter, "probe suite needs n >= 2");
  const Vector e1 = Vector::Unit(n, 0);
  const Vector e2 = Vector::Unit(n, 1);
  const Vector en = Vector::Unit(n, n - 1);
  auto constant = [n](double c) { return TrigPolynomial::constant(n, c); };
  std::vector<NamedTrig> suite;
  suite.push_back({"1", constant(1.0)});
  suite.push_back({"2+cos(x1)", constant(2.0) + TrigPolynomial::cosine(e1)});
  suite.push_back({"1+cos(x1)/2+sin(x2)/2",
                   constant(1.0) + TrigPolynomial::cosine(e1, 0.5) + TrigPolynomial::sine(e2, 0.5)});
  suite.push_back({"exp(i x1)", TrigPolynomial::exponential(e1)});
  suite.push_back({"cos(x1+x2)", TrigPolynomial::cosine(Vector(e1 + e2))});
  suite.push_back({"3+2cos(2x1)", constant(3.0) + TrigPolynomial::cosine(Vector(2.0 * e1), 2.0)});
  suite.push_back({"1+sin(xn)", constant(1.0) + TrigPolynomial::sine(en)});
  suite.push_back({"(2+cos(x1))(2+cos(x2))",
                   (constant(2.0) + TrigPolynomial::cosine(e1)) * (constant(2.0) + TrigPolynomial::cosine(e2))});
  suite.push_back({"1+exp(i x1)/2+exp(-i x2)/3", constant(1.0) + TrigPolynomial::exponential(e1, 0.5) +
                                                      TrigPolynomial::exponential(Vector(-e2), 1.0 / 3.0)});
  suite.push_back({"2+cos(x1)+cos(x2)+cos(xn)",
                   constant(2.0) + TrigPolynomial::cosine(e1) + TrigPolynomial::cosine(e2) + TrigPolynomial::cosine(en)});
  return suite;
}

SharpnessTable sharpness_probe(const HyperInput& in, double s, double t, double q, const std::vector<double>& p_grid,
                               double kappa, const RampFamily& family, int nodes, int check_nodes) {
  SharpnessTable table;
  table.q = q;
  table.kappa = kappa;
  const double pm = p_max(q, t - s, kappa);
  const Vector& h = family.direction;
  const Vector moved = in.u.transpose() * h;
  const double var_outer = moved.dot(in.gamma_s * moved);  // <x, U^T h>, x ~ gamma_s
  const double var_inner = h.dot(in.q * h);                // <Y, h>, Y ~ N(0, Q(t,s))
  const double var_target = h.dot(in.gamma_t * h);         // <y, h>, y ~ gamma_t

  auto ratio_with = [&](double p, double lambda, double radius, int m) {
    const auto& rule = gauss_hermite(m);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    auto psi = [&](double u) { return std::exp(lambda * radius * std::tanh(u / radius)); };
    auto expect = [&](double var, auto&& f) {
      double acc = 0.0;
      const double scale = std::sqrt(2.0 * var);
      for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) acc += rule.weights(i) * f(scale * rule.nodes(i));
      return acc * inv_sqrt_pi;
    };
    const double lhs = std::pow(
        expect(var_outer, [&](double v) { return std::pow(expect(var_inner, [&](double z) { return psi(v + z); }), p); }),
        1.0 / p);
    const double rhs = std::pow(expect(var_target, [&](double u) { return std::pow(psi(u), q); }), 1.0 / q);
    return lhs / rhs;
  };

  for (double p : p_grid) {
    double best = 0.0;
    for (double lambda : family.lambdas) {
      for (double radius : family.radii) {
        SharpnessRow row;
        row.p = p;
        row.p_max = pm;
        row.lambda = lambda;
        row.radius = radius;
        row.ratio = ratio_with(p, lambda, radius, nodes);
        row.error = std::abs(row.ratio - ratio_with(p, lambda, radius, check_nodes)) + 1e-14 * row.ratio;
        row.violation = row.ratio > 1.0 + 3.0 * row.error + 1e-12;
        best = std::max(best, row.ratio);
        table.rows.push_back(row);
      }
    }
    table.max_ratio.push_back(best);
  }
  return table;
}

}  // namespace ou
