#pragma once

// Covariance kernels Q(t,s) = int_s^t U(t,r) Q(r) U(t,r)^T dr and their
// infinite-horizon limits Q(t,-inf).

#include <string>

#include "ou/model.hpp"

namespace ou {

struct CovarianceKernel {
  double s = 0.0;
  double t = 0.0;
  bool infinite_horizon = false;
  Matrix Q;
  std::string method;
  /// Gauss-Legendre panels (dense) or 0 (adaptive per mode).
  int nodes = 0;
  double tolerance = 0.0;
  /// Truncation point and the trace bound of the neglected tail (infinite horizon only).
  double s_star = 0.0;
  double tail_bound = 0.0;
};

struct CovarianceOptions {
  /// Relative tolerance of the per-mode adaptive quadrature.
  double diagonal_tol = 1e-12;
  /// Relative entry tolerance of the composite Gauss-Legendre rule.
  double dense_tol = 1e-11;
  /// Local tolerance of the evolution integrator feeding the dense rule.
  double evolve_tol = 1e-12;
  bool check_window = true;
};

CovarianceKernel q_kernel(const OperatorFamily& model, double s, double t, const CovarianceOptions& options = {});

/// Q(t, s_star) with s_star chosen from the model's tail bound or decay
/// certificate so that the neglected trace is below tol_tail.
CovarianceKernel q_infinity(const OperatorFamily& model, double t, double tol_tail = 1e-12,
                            const CovarianceOptions& options = {});

struct DerivativeCheck {
  double fd = 0.0;
  double formula = 0.0;
  double abs = 0.0;
  double rel = 0.0;
};

/// Central difference of tau -> <Q(tau,s)h,h> at tau = t against
/// ||Q(t)^{1/2}h||^2 + 2<Q(t,s)A(t)^T h, h>.
DerivativeCheck check_dt_quadratic_form(const OperatorFamily& model, double s, double t, const Vector& h,
                                        double fd_step);

/// Central difference of sigma -> <Q(t,sigma)x,x> at sigma = s against
/// -<U(t,s)Q(s)U(t,s)^T x, x>.
DerivativeCheck check_ds_quadratic_form(const OperatorFamily& model, double s, double t, const Vector& x,
                                        double fd_step);

}  // namespace ou
