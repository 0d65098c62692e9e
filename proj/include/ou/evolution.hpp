#pragma once

// Evolution operators U(t,s) and decay certificates for their operator and
// Cameron-Martin norms.

#include <string>
#include <utility>
#include <vector>

#include "ou/model.hpp"

namespace ou {

enum class EvolutionMethod { ClosedForm, Quadrature, Integrated };

std::string to_string(EvolutionMethod method);

struct EvolutionMap {
  double s = 0.0;
  double t = 0.0;
  Matrix matrix;
  EvolutionMethod method = EvolutionMethod::ClosedForm;
  double step = 0.0;  // smallest accepted step (Integrated only)
  int order = 0;      // scheme order (Integrated only)
  long steps = 0;     // accepted steps (Integrated only)
};

struct EvolveOptions {
  /// Relative local error per step of the dense integrator.
  double local_tol = 1e-12;
  bool check_window = true;
};

/// U(t, s) for s <= t.
EvolutionMap evolve(const OperatorFamily& model, double s, double t, const EvolveOptions& options = {});

/// U(t, s)^T.
EvolutionMap adjoint_evolve(const OperatorFamily& model, double s, double t, const EvolveOptions& options = {});

/// U(t, s) by integrating dM/dtau = A(tau) M regardless of the model kind.
EvolutionMap integrate_forward(const OperatorFamily& model, double s, double t, const EvolveOptions& options = {});

/// U(t, s)^T by integrating dV/dtau = V A(tau)^T, V(s) = I.
EvolutionMap integrate_adjoint(const OperatorFamily& model, double s, double t, const EvolveOptions& options = {});

enum class NormMode { OperatorNorm, CameronMartin };

std::string to_string(NormMode mode);

/// ||U(t,s)|| in L(X), or ||U(t,s)||_{H_s -> H_t} with H_r = Q(r)^{1/2}(X).
double measured_norm(const OperatorFamily& model, double s, double t, NormMode mode);

struct DecayCertificate {
  NormMode mode = NormMode::OperatorNorm;
  double M = 1.0;
  double zeta = 0.0;
  double C = 1.0;
  double eta = 0.0;
  double alpha = 0.0;
  double residual = 0.0;
  double fit_slack = 1e-12;
  std::vector<std::pair<double, double>> grid;  // (s, t)
  std::vector<double> measured;
  std::vector<double> bound;
  bool sound = false;

  /// C e^{-eta tau} / tau^alpha (M e^{-zeta tau} in operator-norm mode).
  double evaluate(double tau) const;
};

/// Least-squares fit of log N(s,t) against log C - eta (t-s) - alpha log(t-s),
/// upgraded so that the bound majorizes every sample. Operator-norm mode fits
/// (M, zeta) with alpha = 0.
DecayCertificate fit_decay(const OperatorFamily& model, const std::vector<std::pair<double, double>>& grid,
                           NormMode mode);

/// Pairs s < t from a product of s and t values.
std::vector<std::pair<double, double>> ordered_pairs(const std::vector<double>& s_values,
                                                     const std::vector<double>& t_values);

}  // namespace ou
