#include "ou/trig.hpp"

#include <cmath>

namespace ou {

namespace {

void require_dim(int expected, Eigen::Index got) {
  if (got != expected) {
    throw Error(ErrorCode::BadParameter,
                "dimension mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

TrigPolynomial::TrigPolynomial(int dim, std::vector<TrigTerm> terms) : dim_(dim) {
  for (auto& term : terms) add_term(term.coefficient, term.frequency);
}

TrigPolynomial TrigPolynomial::constant(int dim, Complex c) {
  TrigPolynomial p(dim);
  p.add_term(c, Vector::Zero(dim));
  return p;
}

TrigPolynomial TrigPolynomial::exponential(const Vector& h, Complex c) {
  TrigPolynomial p(static_cast<int>(h.size()));
  p.add_term(c, h);
  return p;
}

TrigPolynomial TrigPolynomial::cosine(const Vector& h, double c) {
  TrigPolynomial p(static_cast<int>(h.size()));
  p.add_term(c / 2, h);
  p.add_term(c / 2, -h);
  return p;
}

TrigPolynomial TrigPolynomial::sine(const Vector& h, double c) {
  TrigPolynomial p(static_cast<int>(h.size()));
  p.add_term(Complex(0.0, -c / 2), h);
  p.add_term(Complex(0.0, c / 2), -h);
  return p;
}

void TrigPolynomial::add_term(Complex c, const Vector& h) {
  require_dim(dim_, h.size());
  terms_.push_back({c, h});
}

Complex TrigPolynomial::operator()(const Vector& x) const {
  require_dim(dim_, x.size());
  Complex acc = 0.0;
  for (const auto& term : terms_) acc += term.coefficient * std::polar(1.0, x.dot(term.frequency));
  return acc;
}

Eigen::VectorXcd TrigPolynomial::gradient(const Vector& x) const {
  require_dim(dim_, x.size());
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(dim_);
  for (const auto& term : terms_) {
    const Complex factor = Complex(0.0, 1.0) * term.coefficient * std::polar(1.0, x.dot(term.frequency));
    g += factor * term.frequency.cast<Complex>();
  }
  return g;
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& other) const {
  require_dim(dim_, other.dim_);
  TrigPolynomial out = *this;
  for (const auto& term : other.terms_) out.terms_.push_back(term);
  return out;
}

TrigPolynomial TrigPolynomial::operator*(const TrigPolynomial& other) const {
  require_dim(dim_, other.dim_);
  TrigPolynomial out(dim_);
  for (const auto& a : terms_) {
    for (const auto& b : other.terms_) out.terms_.push_back({a.coefficient * b.coefficient, a.frequency + b.frequency});
  }
  return out;
}

TrigPolynomial TrigPolynomial::operator*(Complex c) const {
  TrigPolynomial out = *this;
  for (auto& term : out.terms_) term.coefficient *= c;
  return out;
}

TrigPolynomial TrigPolynomial::simplified(double tol) const {
  TrigPolynomial out(dim_);
  for (const auto& term : terms_) {
    bool merged = false;
    for (auto& existing : out.terms_) {
      if ((existing.frequency - term.frequency).cwiseAbs().maxCoeff() <= tol) {
        existing.coefficient += term.coefficient;
        merged = true;
        break;
      }
    }
    if (!merged) out.terms_.push_back(term);
  }
  std::erase_if(out.terms_, [](const TrigTerm& t) { return t.coefficient == Complex(0.0); });
  return out;
}

Matrix TrigPolynomial::frequency_basis(double rel_tol) const {
  if (terms_.empty()) return Matrix(dim_, 0);
  Matrix freq(dim_, static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t j = 0; j < terms_.size(); ++j) freq.col(static_cast<Eigen::Index>(j)) = terms_[j].frequency;
  Eigen::JacobiSVD<Matrix> svd(freq, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double cut = rel_tol * std::max(sv.size() ? sv(0) : 0.0, 1e-300);
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

TrigPolynomial transform(const TrigPolynomial& phi, const Matrix& u, const Matrix& q) {
  TrigPolynomial out(phi.dim());
  const Matrix ut = u.transpose();
  for (const auto& term : phi.terms()) {
    const double damping = std::exp(-0.5 * term.frequency.dot(q * term.frequency));
    out.add_term(term.coefficient * damping, ut * term.frequency);
  }
  return out;
}

double term_distance(const TrigPolynomial& a, const TrigPolynomial& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    worst = std::max(worst, std::abs(a.terms()[j].coefficient - b.terms()[j].coefficient));
    if (a.dim() > 0) {
      worst = std::max(worst, (a.terms()[j].frequency - b.terms()[j].frequency).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

CylindricalFunction::CylindricalFunction(std::string name_, std::function<double(const Vector&)> profile_,
                                         std::function<Vector(const Vector&)> gradient_,
                                         std::function<Matrix(const Vector&)> hessian_, Matrix directions_)
    : name(std::move(name_)),
      profile(std::move(profile_)),
      profile_gradient(std::move(gradient_)),
      profile_hessian(std::move(hessian_)),
      directions(std::move(directions_)) {
  const Eigen::Index k = directions.cols();
  if (k < 1) throw Error(ErrorCode::BadParameter, "cylindrical function needs at least one direction");
  const Matrix gram = directions.transpose() * directions;
  if ((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::BadParameter, "cylindrical directions must be orthonormal");
  }
}

}  // namespace ou
