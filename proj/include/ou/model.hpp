#pragma once

// Time-dependent operator families A(t), B(t) on an n-dimensional Galerkin
// truncation, together with the catalog of concrete models.

#include <functional>
#include <limits>
#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ou/linalg.hpp"

namespace ou {

struct TimeWindow {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return t >= t_min && t <= t_max; }
  bool contains(double s, double t) const { return contains(s) && contains(t); }
};

/// ||U(t,s)|| <= M exp(-zeta (t-s)).
struct DecayBound {
  double M = 1.0;
  double zeta = 0.0;
};

/// ||U(t,s)||_{H_s -> H_t} <= C exp(-eta (t-s)) / (t-s)^alpha.
struct CameronMartinBound {
  double C = 1.0;
  double eta = 0.0;
  double alpha = 0.0;
};

/// Modes k = 1..n evolve independently: A(t) = diag(a_k(t)), B(t) = diag(b_k(t)).
struct DiagonalCoefficients {
  std::function<double(int, double)> a;
  std::function<double(int, double)> b;
  /// Optional closed form of int_s^t a_k(tau) dtau (without history freezing).
  std::function<double(int, double, double)> a_integral;
};

struct DenseCoefficients {
  std::function<Matrix(double)> A;
  std::function<Matrix(double)> B;
  /// Optional closed form for U(t, s) given (s, t).
  std::function<Matrix(double, double)> evolution;
};

/// Memo of expensive dense results (evolution maps, covariance kernels) keyed
/// by kind, (s, t) and the tolerances that affect the value. Copies start
/// empty, so a modified copy of a family never sees stale entries.
class ResultCache {
 public:
  enum Kind { Evolution = 0, Kernel = 1 };

  struct Entry {
    Matrix value;
    long count = 0;
    double aux = 0.0;
  };

  ResultCache() = default;
  ResultCache(const ResultCache&) {}
  ResultCache& operator=(const ResultCache&) {
    clear();
    return *this;
  }

  bool find(Kind kind, double s, double t, double tol_a, double tol_b, Entry& out) const;
  void store(Kind kind, double s, double t, double tol_a, double tol_b, Entry entry) const;
  void clear() const;
  std::size_t size() const;

 private:
  using Key = std::array<double, 5>;
  static constexpr std::size_t kCapacity = 4096;
  mutable std::mutex mutex_;
  mutable std::map<Key, Entry> entries_;
};

struct OperatorFamily {
  std::string name;
  int dim = 0;
  TimeWindow window;
  std::variant<DiagonalCoefficients, DenseCoefficients> coefficients;

  /// Coefficients at times before history_start are frozen at their value
  /// at history_start. -inf means the formulas are used on all of R.
  double history_start = -std::numeric_limits<double>::infinity();

  /// U and Q have closed forms (tighter default tolerances downstream).
  bool closed_form = false;
  /// sup_t ||B(t)|| on the window.
  double noise_bound = 0.0;
  std::optional<DecayBound> decay;
  std::optional<CameronMartinBound> hr_decay;

  /// Diagonal families: lambda_k = sup of a_k over [-50, 50] (diagnostic).
  std::vector<double> lambda_sup;
  /// Explicit bound on trace of the Q(t, -inf) - Q(t, s_star) tail: (t, s_star) -> bound.
  std::function<double(double, double)> tail_bound;
  /// Non-uniqueness demo: t -> m_t = exp(int_{-inf}^t a_1).
  std::function<double(double)> mode_one_scale;
  /// Free-form description recorded in reports: (key, value) pairs.
  std::map<std::string, std::string> metadata;
  /// Dense results memo; call cache.clear() after mutating the coefficients.
  ResultCache cache;

  bool is_diagonal() const { return std::holds_alternative<DiagonalCoefficients>(coefficients); }
  const DiagonalCoefficients& diagonal() const { return std::get<DiagonalCoefficients>(coefficients); }
  const DenseCoefficients& dense() const { return std::get<DenseCoefficients>(coefficients); }

  double effective_time(double t) const { return t < history_start ? history_start : t; }

  /// Diagonal coefficients with history freezing applied; k is 1-based.
  double a(int k, double t) const;
  double b(int k, double t) const;
  /// int_s^t a_k with freezing; closed form when available, adaptive quadrature otherwise.
  double a_integral(int k, double s, double t) const;

  Matrix A(double t) const;
  Matrix A_star(double t) const { return A(t).transpose(); }
  Matrix B(double t) const;
  /// Q(t) = B(t) B(t)^T.
  Matrix Q(double t) const;

  /// Throws WindowExceeded unless s <= t and both lie in the window.
  void require_window(double s, double t) const;
};

/// Sup of f on [lo, hi]: grid search with the given step, refined by
/// golden-section around the best grid point.
double coefficient_supremum(const std::function<double(double)>& f, double lo, double hi, double step = 1e-3);

/// a_k(t) = -(k^2 + c1)/(t^{2k} + 1), b_k(t) = sin(k t) + c2.
/// Coefficients are frozen before window.t_min so that the history is decaying.
OperatorFamily make_diagonal_paper(int n, double c1, double c2, TimeWindow window = {-2.0, 2.0});

/// a_k = lambda, b_k = b for every mode.
OperatorFamily make_diagonal_constant(int n, double lambda, double b, TimeWindow window = {-50.0, 50.0});

struct ScalarOptions {
  /// Optional closed form of int_s^t a.
  std::function<double(double, double)> a_integral;
  /// Set when sup a < 0 is required (inequality experiments).
  bool require_negative_sup = true;
};

/// A(t) = a(t) I on dimension n with a caller-supplied B(t).
OperatorFamily make_scalar(int n, std::function<double(double)> a, std::function<Matrix(double)> B,
                           TimeWindow window, ScalarOptions options = {});

/// Conservative finite-difference discretization of (a(t,x) u')' + a0(t,x) u on
/// [0,1] with Dirichlet boundary, m interior points, h = 1/(m+1). B = I when
/// no B is given. Coefficients are frozen before window.t_min.
OperatorFamily make_parabolic_1d(int m, std::function<double(double, double)> a,
                                 std::function<double(double, double)> a0, TimeWindow window,
                                 std::function<Matrix(double)> B = {});

/// a_1(t) = -t^2/(1+t^4), a_k = -k^2 (k >= 2), b_1(t) = 1/(1+t^2), b_k = 1.
OperatorFamily make_nonunique_demo(int n, TimeWindow window = {-10.0, 10.0});

/// int_{-inf}^t tau^2/(1+tau^4) dtau in closed form.
double nonunique_mode_one_antiderivative(double t);

struct ModelCatalogEntry {
  std::string name;
  std::map<std::string, double> defaults;
  std::string description;
};

const std::vector<ModelCatalogEntry>& model_catalog();

/// Builds a catalog model from its name and parameters. Parameters missing
/// from `params` take the catalog defaults; unknown names throw BadParameter.
OperatorFamily make_model(const std::string& name, const std::map<std::string, double>& params);

}  // namespace ou
