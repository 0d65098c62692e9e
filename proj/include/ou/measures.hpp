#pragma once

// Gaussian measures, seeded sampling, evolution systems of measures and the
// invariance and ergodic-limit verifiers.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ou/model.hpp"
#include "ou/trig.hpp"

namespace ou {

class GaussianMeasure {
 public:
  GaussianMeasure(Vector mean, const Matrix& cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  /// F with F F^T = cov (spectral factor; kernel directions are zero columns).
  const Matrix& factor() const { return factor_; }

  /// exp(i<m,h> - <Qh,h>/2).
  Complex char_fn(const Vector& h) const;

  /// The measure convolved with the point mass at v.
  GaussianMeasure shifted(const Vector& v) const { return GaussianMeasure(mean_ + v, cov_); }

 private:
  Vector mean_;
  Matrix cov_;
  Matrix factor_;
};

inline Complex char_fn(const GaussianMeasure& mu, const Vector& h) { return mu.char_fn(h); }

/// dim x count matrix of draws; column j uses normals with counters j*dim .. j*dim+dim-1
/// of the stream seed_stream(seed, label).
Matrix sample(const GaussianMeasure& mu, std::size_t count, std::uint64_t seed, std::string_view label = "sample");

/// int phi dmu = sum_j c_j mu^(h_j).
Complex mean_functional(const GaussianMeasure& mu, const TrigPolynomial& phi);

struct EvolutionSystem {
  std::string label;
  std::function<GaussianMeasure(double)> measure;
};

/// gamma_t = N(0, Q(t,-inf)); kernels are cached per t.
EvolutionSystem gaussian_system(const OperatorFamily& model, double tol_tail = 1e-12);

/// gamma_t convolved with the point mass at shift(t).
EvolutionSystem shifted_system(const OperatorFamily& model, std::function<Vector(double)> shift, std::string label,
                               double tol_tail = 1e-12);

/// Second system of the non-uniqueness demo: shift m_t e_1.
EvolutionSystem nonunique_shifted_system(const OperatorFamily& model, double tol_tail = 1e-12);

/// Basis vectors, sums of adjacent basis vectors, the all-ones vector, then
/// seeded random unit vectors, truncated or filled up to `total` probes.
std::vector<Vector> make_probes(int n, std::size_t total, std::uint64_t seed);

/// n + (n-1) + 1 + 16.
std::size_t default_probe_count(int n);

struct InvarianceRow {
  double s = 0.0;
  double t = 0.0;
  std::size_t probe = 0;
  Complex lhs;
  Complex rhs;
  double discrepancy = 0.0;
};

struct InvarianceReport {
  std::string system;
  std::vector<InvarianceRow> rows;
  double max_discrepancy = 0.0;
  /// max over pairs of |int P_{s,t} phi d nu_s - int phi d nu_t| for a probe polynomial phi.
  double dual_discrepancy = 0.0;
  /// max over pairs of the difference between the two forms.
  double form_agreement = 0.0;
  std::size_t probe_count = 0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Checks nu_t^(h) = exp(-<Q(t,s)h,h>/2) nu_s^(U(t,s)^T h) for all pairs and probes.
/// tolerance <= 0 selects 1e-8 for closed-form models and 1e-6 otherwise.
InvarianceReport verify_invariance(const EvolutionSystem& system, const OperatorFamily& model,
                                   const std::vector<std::pair<double, double>>& pairs,
                                   const std::vector<Vector>& probes, double tolerance = 0.0);

struct ErgodicRow {
  double s = 0.0;
  Complex value;
  double distance = 0.0;
  double schedule = 0.0;
};

struct ErgodicReport {
  double t = 0.0;
  Complex limit;
  std::vector<ErgodicRow> rows;
  bool monotone = false;
  bool within_schedule = false;
  double final_distance = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// |P_{s,t} phi(x0) - m_t(phi)| along s_values (decreasing towards -inf).
ErgodicReport verify_ergodic_limit(const OperatorFamily& model, double t, const Vector& x0,
                                   const std::vector<double>& s_values, const TrigPolynomial& phi,
                                   double tolerance = 1e-3, double tol_tail = 1e-12);

}  // namespace ou
