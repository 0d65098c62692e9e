#pragma once

// Trigonometric polynomials sum_j c_j e^{i<x,h_j>} and cylindrical functions
// psi(<x,h_1>, ..., <x,h_k>).

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ou/linalg.hpp"

namespace ou {

using Complex = std::complex<double>;

struct TrigTerm {
  Complex coefficient;
  Vector frequency;
};

class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(int dim) : dim_(dim) {}
  TrigPolynomial(int dim, std::vector<TrigTerm> terms);

  static TrigPolynomial constant(int dim, Complex c);
  /// c e^{i<x,h>}.
  static TrigPolynomial exponential(const Vector& h, Complex c = 1.0);
  /// c cos<x,h>.
  static TrigPolynomial cosine(const Vector& h, double c = 1.0);
  /// c sin<x,h>.
  static TrigPolynomial sine(const Vector& h, double c = 1.0);

  int dim() const { return dim_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  void add_term(Complex c, const Vector& h);

  Complex operator()(const Vector& x) const;
  /// Gradient of the complex-valued function (real and imaginary parts).
  Eigen::VectorXcd gradient(const Vector& x) const;

  TrigPolynomial operator+(const TrigPolynomial& other) const;
  TrigPolynomial operator*(const TrigPolynomial& other) const;
  TrigPolynomial operator*(Complex c) const;

  /// Merges terms with equal frequencies (to `tol` in max norm) and drops zero coefficients.
  TrigPolynomial simplified(double tol = 0.0) const;

  /// Orthonormal basis of the span of the frequencies (columns); rank is the column count.
  Matrix frequency_basis(double rel_tol = 1e-12) const;

 private:
  int dim_ = 0;
  std::vector<TrigTerm> terms_;
};

/// Frequencies h -> U^T h and coefficients c -> c e^{-<Qh,h>/2}: the image of
/// phi under the transition operator with evolution U and covariance Q.
TrigPolynomial transform(const TrigPolynomial& phi, const Matrix& u, const Matrix& q);

/// Largest coefficient-wise and frequency-wise difference between two term lists
/// with identical term order.
double term_distance(const TrigPolynomial& a, const TrigPolynomial& b);

struct CylindricalFunction {
  std::string name;
  std::function<double(const Vector&)> profile;
  std::function<Vector(const Vector&)> profile_gradient;
  std::function<Matrix(const Vector&)> profile_hessian;
  /// n x k matrix with orthonormal columns h_1..h_k.
  Matrix directions;

  CylindricalFunction() = default;
  CylindricalFunction(std::string name, std::function<double(const Vector&)> profile,
                      std::function<Vector(const Vector&)> gradient, std::function<Matrix(const Vector&)> hessian,
                      Matrix directions);

  int dim() const { return static_cast<int>(directions.rows()); }
  int active() const { return static_cast<int>(directions.cols()); }

  Vector project(const Vector& x) const { return directions.transpose() * x; }
  double operator()(const Vector& x) const { return profile(project(x)); }
  Vector gradient(const Vector& x) const { return directions * profile_gradient(project(x)); }
  Matrix hessian(const Vector& x) const {
    return directions * profile_hessian(project(x)) * directions.transpose();
  }
};

}  // namespace ou
