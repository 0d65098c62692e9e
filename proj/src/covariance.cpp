#include "ou/covariance.hpp"

#include <cmath>
#include <sstream>

#include "ou/evolution.hpp"
#include "ou/parallel.hpp"
#include "ou/quadrature.hpp"

namespace ou {

namespace {

// int_0^L exp(2 a sigma) d sigma, L possibly infinite when a < 0.
double frozen_integral(double a, double length) {
  if (a == 0.0) return length;
  if (std::isinf(length)) return -1.0 / (2.0 * a);
  return std::expm1(2.0 * a * length) / (2.0 * a);
}

// Breakpoints t - {0, 1, 2, 4, ...} so that long intervals resolve the
// concentration of the integrand near t.
std::vector<double> graded_points(double s, double t) {
  std::vector<double> pts{t};
  for (double gap = 1.0; t - gap > s; gap *= 2.0) pts.push_back(t - gap);
  pts.push_back(s);
  std::reverse(pts.begin(), pts.end());
  return pts;
}

double mode_kernel(const OperatorFamily& model, int k, double s, double t, double tol) {
  const double h = model.history_start;
  double total = 0.0;
  const double live_from = std::max(s, h);
  if (live_from < t) {
    auto integrand = [&](double sigma) {
      const double b = model.b(k, sigma);
      return std::exp(2.0 * model.a_integral(k, sigma, t)) * b * b;
    };
    total += integrate_pieces(integrand, graded_points(live_from, t), tol).value;
  }
  if (s < h) {
    const double a_h = model.diagonal().a(k, h);
    const double b_h = model.diagonal().b(k, h);
    const double top = std::min(h, t);
    const double carry = (t > h) ? std::exp(2.0 * model.a_integral(k, h, t)) : 1.0;
    // sigma in [s, top]: exp(2 a_h (top - sigma)) * carry
    total += carry * b_h * b_h * frozen_integral(a_h, top - s);
  }
  return total;
}

CovarianceKernel diagonal_kernel(const OperatorFamily& model, double s, double t, const CovarianceOptions& opts) {
  CovarianceKernel out;
  out.s = s;
  out.t = t;
  out.method = "adaptive-gauss-kronrod";
  out.tolerance = opts.diagonal_tol;
  Vector q(model.dim);
  parallel_for(static_cast<std::size_t>(model.dim), [&](std::size_t i) {
    q(static_cast<Eigen::Index>(i)) = mode_kernel(model, static_cast<int>(i) + 1, s, t, opts.diagonal_tol);
  });
  out.Q = q.asDiagonal();
  return out;
}

// Sum over Gauss-Legendre nodes of U(t,r) Q(r) U(t,r)^T with `panels` equal panels.
Matrix legendre_sum(const OperatorFamily& model, double s, double t, int panels, const EvolveOptions& eopts) {
  const auto& rule = gauss_legendre(8);
  const double width = (t - s) / panels;
  struct Node {
    double r;
    double w;
  };
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(panels) * 8);
  for (int p = 0; p < panels; ++p) {
    const double mid = s + (p + 0.5) * width;
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
      nodes.push_back({mid + 0.5 * width * rule.nodes(j), 0.5 * width * rule.weights(j)});
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.r > b.r; });

  const auto& dense = model.dense();
  Matrix acc = Matrix::Zero(model.dim, model.dim);
  Matrix u_prev;
  double r_prev = t;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double r = nodes[j].r;
    Matrix u;
    if (dense.evolution && r >= model.history_start) {
      u = dense.evolution(r, t);
    } else if (j == 0 || u_prev.size() == 0) {
      u = integrate_forward(model, r, t, eopts).matrix;
    } else {
      u = u_prev * integrate_forward(model, r, r_prev, eopts).matrix;
    }
    const Matrix b = model.B(r);
    const Matrix ub = u * b;
    acc.noalias() += nodes[j].w * (ub * ub.transpose());
    u_prev = std::move(u);
    r_prev = r;
  }
  return acc;
}

CovarianceKernel dense_kernel(const OperatorFamily& model, double s, double t, const CovarianceOptions& opts) {
  CovarianceKernel out;
  out.s = s;
  out.t = t;
  out.method = "composite-gauss-legendre";
  out.tolerance = opts.dense_tol;
  ResultCache::Entry hit;
  if (model.cache.find(ResultCache::Kernel, s, t, opts.dense_tol, opts.evolve_tol, hit)) {
    out.Q = std::move(hit.value);
    out.nodes = static_cast<int>(hit.count);
    return out;
  }
  EvolveOptions eopts;
  eopts.local_tol = opts.evolve_tol;
  eopts.check_window = false;

  double scale = 0.0;
  for (int i = 0; i <= 8; ++i) {
    scale = std::max(scale, model.A(s + (t - s) * i / 8.0).cwiseAbs().rowwise().sum().maxCoeff());
  }
  int panels = std::max(1, static_cast<int>(std::ceil((t - s) * scale / 2.0)));
  Matrix coarse = legendre_sum(model, s, t, panels, eopts);
  constexpr int kMaxPanels = 1 << 16;
  while (true) {
    if (2 * panels > kMaxPanels) {
      std::ostringstream msg;
      msg << "Gauss-Legendre rule on [" << s << ", " << t << "] did not converge with " << panels << " panels";
      throw Error(ErrorCode::QuadratureStalled, msg.str());
    }
    panels *= 2;
    Matrix fine = legendre_sum(model, s, t, panels, eopts);
    const double diff = (fine - coarse).cwiseAbs().maxCoeff();
    const double size = fine.cwiseAbs().maxCoeff();
    coarse = std::move(fine);
    if (diff <= opts.dense_tol * size || diff <= 1e-300) break;
  }
  out.Q = coarse;
  out.nodes = panels;
  model.cache.store(ResultCache::Kernel, s, t, opts.dense_tol, opts.evolve_tol, {out.Q, panels, 0.0});
  return out;
}

CovarianceKernel kernel_unchecked(const OperatorFamily& model, double s, double t, const CovarianceOptions& opts) {
  if (s > t) throw Error(ErrorCode::BadParameter, "q_kernel needs s <= t");
  if (s == t) {
    CovarianceKernel out;
    out.s = s;
    out.t = t;
    out.method = "empty-interval";
    out.Q = Matrix::Zero(model.dim, model.dim);
    return out;
  }
  CovarianceKernel out = model.is_diagonal() ? diagonal_kernel(model, s, t, opts) : dense_kernel(model, s, t, opts);
  out.Q = psd_repair(out.Q);
  return out;
}

double quadratic(const Matrix& q, const Vector& h) { return h.dot(q * h); }

}  // namespace

CovarianceKernel q_kernel(const OperatorFamily& model, double s, double t, const CovarianceOptions& options) {
  if (options.check_window) model.require_window(s, t);
  return kernel_unchecked(model, s, t, options);
}

CovarianceKernel q_infinity(const OperatorFamily& model, double t, double tol_tail, const CovarianceOptions& options) {
  if (!(tol_tail > 0.0)) throw Error(ErrorCode::BadParameter, "tail tolerance must be > 0");
  if (options.check_window && !model.window.contains(t)) {
    std::ostringstream msg;
    msg << model.name << ": t = " << t << " outside window";
    throw Error(ErrorCode::WindowExceeded, msg.str());
  }
  double s_star = 0.0;
  double bound = 0.0;
  if (model.tail_bound) {
    double span = 1.0;
    while (model.tail_bound(t, t - span) >= tol_tail) {
      span *= 2.0;
      if (span > 1e12) throw Error(ErrorCode::NoDecay, "tail bound does not fall below tolerance");
    }
    s_star = t - span;
    bound = model.tail_bound(t, s_star);
  } else if (model.decay && model.decay->zeta > 0.0) {
    const double m2k2n = model.dim * std::pow(model.decay->M * model.noise_bound, 2);
    const double zeta = model.decay->zeta;
    double span = (m2k2n > 0.0) ? std::max(0.0, std::log(m2k2n / (2.0 * zeta * tol_tail)) / (2.0 * zeta)) : 0.0;
    auto tail = [&](double sp) { return m2k2n * std::exp(-2.0 * zeta * sp) / (2.0 * zeta); };
    while (tail(span) > tol_tail) span += 1e-9 * std::max(1.0, span);
    s_star = t - span;
    bound = tail(span);
  } else {
    throw Error(ErrorCode::NoDecay, model.name + ": no decay rate zeta > 0 and no tail bound");
  }
  CovarianceKernel out = kernel_unchecked(model, s_star, t, options);
  out.s = -std::numeric_limits<double>::infinity();
  out.infinite_horizon = true;
  out.s_star = s_star;
  out.tail_bound = bound;
  return out;
}

DerivativeCheck check_dt_quadratic_form(const OperatorFamily& model, double s, double t, const Vector& h,
                                        double fd_step) {
  if (!(s < t) || !(fd_step > 0.0) || t - fd_step <= s) {
    throw Error(ErrorCode::BadParameter, "derivative check needs s < t - fd_step");
  }
  CovarianceOptions opts;
  opts.check_window = false;
  opts.diagonal_tol = 1e-14;
  opts.dense_tol = 1e-13;
  opts.evolve_tol = 1e-13;
  const double up = quadratic(kernel_unchecked(model, s, t + fd_step, opts).Q, h);
  const double down = quadratic(kernel_unchecked(model, s, t - fd_step, opts).Q, h);
  const Matrix qts = kernel_unchecked(model, s, t, opts).Q;
  DerivativeCheck out;
  out.fd = (up - down) / (2.0 * fd_step);
  out.formula = quadratic(model.Q(t), h) + 2.0 * h.dot(qts * (model.A_star(t) * h));
  out.abs = std::abs(out.fd - out.formula);
  out.rel = out.abs / std::max(std::abs(out.formula), 1e-300);
  return out;
}

DerivativeCheck check_ds_quadratic_form(const OperatorFamily& model, double s, double t, const Vector& x,
                                        double fd_step) {
  if (!(s < t) || !(fd_step > 0.0) || s + fd_step >= t) {
    throw Error(ErrorCode::BadParameter, "derivative check needs s + fd_step < t");
  }
  CovarianceOptions opts;
  opts.check_window = false;
  opts.diagonal_tol = 1e-14;
  opts.dense_tol = 1e-13;
  opts.evolve_tol = 1e-13;
  const double up = quadratic(kernel_unchecked(model, s + fd_step, t, opts).Q, x);
  const double down = quadratic(kernel_unchecked(model, s - fd_step, t, opts).Q, x);
  EvolveOptions eopts;
  eopts.check_window = false;
  eopts.local_tol = 1e-13;
  const Matrix u = evolve(model, s, t, eopts).matrix;
  DerivativeCheck out;
  out.fd = (up - down) / (2.0 * fd_step);
  out.formula = -quadratic(Matrix(u * model.Q(s) * u.transpose()), x);
  out.abs = std::abs(out.fd - out.formula);
  out.rel = out.abs / std::max(std::abs(out.formula), 1e-300);
  return out;
}

}  // namespace ou
