#pragma once

// Transition operators P_{s,t}: exact on trigonometric polynomials, Monte
// Carlo on general observables; the generator L(r) and the differentiation
// formulas in s and t.

#include <cstdint>
#include <functional>

#include "ou/evolution.hpp"
#include "ou/measures.hpp"
#include "ou/trig.hpp"

namespace ou {

/// P_{s,t} phi as a trigonometric polynomial: frequencies U(t,s)^T h_j,
/// coefficients c_j exp(-<Q(t,s)h_j,h_j>/2).
TrigPolynomial transformed(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi);

/// P_{s,t} phi (x).
Complex apply_exact(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi, const Vector& x);

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  double lower(double z = 1.96) const { return value - z * std_error; }
  double upper(double z = 1.96) const { return value + z * std_error; }
};

/// Sample mean of phi over N(U(t,s)x, Q(t,s)).
MCEstimate apply_mc(const OperatorFamily& model, double s, double t, const std::function<double(const Vector&)>& phi,
                    const Vector& x, std::size_t count, std::uint64_t seed);

/// Mean and standard error of the columns' values f(column) with chunked,
/// worker-independent summation.
MCEstimate sample_mean(const Matrix& samples, const std::function<double(const Vector&)>& f);

/// L(r) phi (x) = sum_j c_j [i<x, A(r)^T h_j> - ||Q(r)^{1/2}h_j||^2 / 2] e^{i<x,h_j>}.
Complex generator_apply(const OperatorFamily& model, double r, const TrigPolynomial& phi, const Vector& x);

/// L(r) phi (x) = 1/2 tr(Q(r) D^2 phi(x)) + <x, A(r)^T grad phi(x)>.
double generator_apply(const OperatorFamily& model, double r, const CylindricalFunction& phi, const Vector& x);

/// P_{s,t}(L(t) phi)(x) by the closed form
/// sum_j [i<x, U^T A^T h_j> - <Q(t,s) A^T h_j, h_j> - ||Q(t)^{1/2}h_j||^2/2] c_j e^{-<Q(t,s)h_j,h_j>/2} e^{i<x,U^T h_j>}.
Complex transported_generator(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi,
                              const Vector& x);

/// Same quantity computed by differentiating P_{s,t} e^{i<.,h + eps A^T h>} in eps
/// (fourth-order Richardson difference) instead of the closed form.
Complex transported_generator_numeric(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi,
                                      const Vector& x, double eps = 1e-3);

struct DifferentiationReport {
  double fd_step = 0.0;
  Complex fd_s, formula_s;  // d/ds P_{s,t}phi(x) against -L(s) P_{s,t} phi(x)
  Complex fd_t, formula_t;  // d/dt P_{s,t}phi(x) against P_{s,t} L(t) phi(x)
  double discrepancy_s = 0.0;
  double discrepancy_t = 0.0;
  /// The same discrepancies at fd_step / 2 and the ratios full / half.
  double discrepancy_s_half = 0.0;
  double discrepancy_t_half = 0.0;
  double ratio_s = 0.0;
  double ratio_t = 0.0;
};

DifferentiationReport check_differentiation(const OperatorFamily& model, double s, double t, const TrigPolynomial& phi,
                                            const Vector& x, double fd_step);

struct SmoothObservable {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct GradientEstimateReport {
  double lhs = 0.0;  // ||Q(s)^{1/2} grad P_{s,t} phi(x)||
  double rhs = 0.0;  // ||U(t,s)||_{H_s -> H_t} P_{s,t}(||Q(t)^{1/2} grad phi||)(x)
  double lhs_stderr = 0.0;
  double rhs_stderr = 0.0;
  double norm_factor = 0.0;
  std::size_t count = 0;
  bool pass = false;
};

/// Gradient of P_{s,t}phi computed as E[U(t,s)^T grad phi(U(t,s)x + Y)], Y ~ N(0, Q(t,s)).
/// norm_factor is the Cameron-Martin norm bound used on the right-hand side.
GradientEstimateReport gradient_estimate_check(const OperatorFamily& model, double s, double t,
                                               const SmoothObservable& phi, const Vector& x, double norm_factor,
                                               std::size_t count, std::uint64_t seed);

}  // namespace ou
