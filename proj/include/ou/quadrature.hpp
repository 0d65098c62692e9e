#pragma once

// Quadrature building blocks: adaptive Gauss-Kronrod (Boost.Math) for 1-D
// integrals, Golub-Welsch Gauss-Hermite / Gauss-Legendre rules, and tensor
// Gauss-Hermite expectations against low-dimensional Gaussians.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "ou/error.hpp"
#include "ou/linalg.hpp"

namespace ou {

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

namespace detail {

template <typename F>
IntegrationResult gauss_kronrod_raw(F& f, double a, double b, double rel_tol, unsigned max_depth) {
  IntegrationResult r;
  if (a == b) return r;
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (std::isfinite(a) && std::isfinite(b)) {
    // Boost 1.74 compares the unscaled [-1,1] error against the scaled
    // tolerance, which recurses to full depth on short intervals. Integrate
    // over [0,1] instead, where the scale factor is harmless.
    const double width = b - a;
    auto unit = [&](double u) { return width * f(a + width * u); };
    r.value = Rule::integrate(unit, 0.0, 1.0, max_depth, rel_tol, &r.error, &r.l1);
    r.l1 = std::abs(r.l1);
  } else {
    r.value = Rule::integrate(f, a, b, max_depth, rel_tol, &r.error, &r.l1);
  }
  return r;
}

inline void require_converged(const IntegrationResult& r, double rel_tol, double a, double b) {
  if (!std::isfinite(r.value) || r.error > std::max(1e4 * rel_tol * r.l1, 1e-250)) {
    std::ostringstream msg;
    msg << "integral on [" << a << ", " << b << "] value " << r.value << " error " << r.error;
    throw Error(ErrorCode::QuadratureStalled, msg.str());
  }
}

}  // namespace detail

/// Adaptive 31-point Gauss-Kronrod on [a, b]; infinite endpoints allowed.
/// Throws QuadratureStalled when the final error estimate is far above the
/// requested relative tolerance.
template <typename F>
IntegrationResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 15) {
  const IntegrationResult r = detail::gauss_kronrod_raw(f, a, b, rel_tol, max_depth);
  detail::require_converged(r, rel_tol, a, b);
  return r;
}

/// Sum of adaptive integrals over consecutive breakpoints (sorted ascending).
/// The tolerance applies to the sum: pieces that carry a small share of the
/// L1 mass get a proportionally looser relative tolerance.
template <typename F>
IntegrationResult integrate_pieces(F&& f, const std::vector<double>& points, double rel_tol = 1e-13) {
  const std::size_t pieces = points.size() < 2 ? 0 : points.size() - 1;
  std::vector<double> mass(pieces);
  double total_mass = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    mass[i] = detail::gauss_kronrod_raw(f, points[i], points[i + 1], rel_tol, 0).l1;
    total_mass += mass[i];
  }
  IntegrationResult total;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double share = mass[i] / std::max(total_mass, 1e-300);
    const double tol = std::min(1e-3, rel_tol / std::max(share, rel_tol));
    const auto piece = detail::gauss_kronrod_raw(f, points[i], points[i + 1], tol, 15);
    total.value += piece.value;
    total.error += piece.error;
    total.l1 += piece.l1;
  }
  if (pieces > 0) detail::require_converged(total, rel_tol, points.front(), points.back());
  return total;
}

struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix,
// weights are mu0 * (first eigenvector component)^2.
inline QuadratureRule golub_welsch(const Vector& off_diagonal, double mu0) {
  const Eigen::Index n = off_diagonal.size() + 1;
  Matrix jacobi = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = off_diagonal(i);
    jacobi(i + 1, i) = off_diagonal(i);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace detail

/// Physicists' Gauss-Hermite rule: sum w_i f(x_i) ~ int f(x) e^{-x^2} dx.
inline const QuadratureRule& gauss_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    if (n < 1) throw Error(ErrorCode::BadParameter, "Gauss-Hermite needs at least one node");
    Vector off(n - 1);
    for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(k / 2.0);
    it = cache.emplace(n, detail::golub_welsch(off, std::sqrt(std::numbers::pi))).first;
  }
  return it->second;
}

/// Gauss-Legendre rule on [-1, 1].
inline const QuadratureRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    if (n < 1) throw Error(ErrorCode::BadParameter, "Gauss-Legendre needs at least one node");
    Vector off(n - 1);
    for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    it = cache.emplace(n, detail::golub_welsch(off, 2.0)).first;
  }
  return it->second;
}

/// Calls visit(u, w) for every node of the tensor Gauss-Hermite rule for
/// N(mean, cov) in dimension k = mean.size(); the weights w sum to 1.
/// Degenerate covariances are handled through the spectral square root.
template <typename Visit>
void for_each_gaussian_node(const Vector& mean, const Matrix& cov, int nodes, Visit&& visit) {
  const auto& rule = gauss_hermite(nodes);
  const Eigen::Index k = mean.size();
  const Matrix factor = std::sqrt(2.0) * sqrt_psd(cov);
  const double norm = std::pow(std::numbers::pi, -0.5 * static_cast<double>(k));
  std::vector<int> index(static_cast<std::size_t>(k), 0);
  Vector z(k);
  Vector u(k);
  while (true) {
    double w = norm;
    for (Eigen::Index d = 0; d < k; ++d) {
      z(d) = rule.nodes(index[d]);
      w *= rule.weights(index[d]);
    }
    u.noalias() = mean + factor * z;
    visit(static_cast<const Vector&>(u), w);
    Eigen::Index d = 0;
    for (; d < k; ++d) {
      if (++index[d] < nodes) break;
      index[d] = 0;
    }
    if (d == k) break;
  }
}

/// E f(U) for U ~ N(mean, cov) by tensor Gauss-Hermite.
template <typename F>
double gaussian_expectation(F&& f, const Vector& mean, const Matrix& cov, int nodes = 64) {
  double acc = 0.0;
  for_each_gaussian_node(mean, cov, nodes, [&](const Vector& u, double w) { acc += w * f(u); });
  return acc;
}

}  // namespace ou
