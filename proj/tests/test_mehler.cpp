#include <doctest.h>

#include <cmath>

#include "ou/covariance.hpp"
#include "ou/mehler.hpp"

using namespace ou;

namespace {

const double kHalfQ10 = (1.0 - std::exp(-2.0)) / 4.0;

TrigPolynomial probe_poly(int n, int j) {
  Vector h1 = Vector::LinSpaced(n, 0.2 * (j + 1), -0.3);
  Vector h2 = Vector::Unit(n, j % n) * 0.7;
  return TrigPolynomial::exponential(h1, Complex(0.5, -0.25)) + TrigPolynomial::cosine(h2, 0.8);
}

}  // namespace

TEST_CASE("trig polynomial basics") {
  Vector h(2);
  h << 1.0, 2.0;
  Vector x(2);
  x << 0.3, -0.1;
  auto c = TrigPolynomial::cosine(h);
  CHECK(std::abs(c(x) - std::cos(h.dot(x))) <= 1e-15);
  auto s = TrigPolynomial::sine(h);
  CHECK(std::abs(s(x) - std::sin(h.dot(x))) <= 1e-15);
  auto prod = (c * s).simplified(1e-15);
  CHECK(std::abs(prod(x) - std::cos(h.dot(x)) * std::sin(h.dot(x))) <= 1e-14);
  CHECK(std::abs((c + s)(x) - Complex(std::cos(h.dot(x)) + std::sin(h.dot(x)))) <= 1e-14);
  CHECK(c.frequency_basis().cols() == 1);
}

TEST_CASE("apply_exact examples") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto phi = TrigPolynomial::exponential(Vector::Unit(8, 0));
  const Vector x = Vector::LinSpaced(8, 0.5, -0.5);
  CHECK(std::abs(apply_exact(dc, 0.4, 0.4, phi, x) - phi(x)) <= 1e-15);
  const Complex v = apply_exact(dc, 0.0, 1.0, phi, Vector::Zero(8));
  CHECK(std::abs(v - std::exp(-kHalfQ10)) <= 1e-12);
  CHECK(std::abs(v.real() - 0.8056014) <= 1e-7);
}

TEST_CASE("property: evolution law of the transition operators") {
  for (const auto& name : {"diagonal-constant", "diagonal-paper", "parabolic-1d"}) {
    auto m = make_model(name, {});
    for (int j = 0; j < 4; ++j) {
      auto phi = probe_poly(m.dim, j);
      auto direct = transformed(m, -0.5, 1.0, phi);
      auto composed = transformed(m, -0.5, 0.2, transformed(m, 0.2, 1.0, phi));
      CHECK_MESSAGE(term_distance(direct, composed) <= 1e-10, name);
    }
  }
}

TEST_CASE("property: transformed frequencies are U^T h") {
  auto m = make_model("parabolic-1d", {});
  auto phi = probe_poly(m.dim, 1);
  const Matrix u = evolve(m, 0.0, 0.7).matrix;
  auto out = transformed(m, 0.0, 0.7, phi);
  REQUIRE(out.size() == phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    CHECK((out.terms()[j].frequency - u.transpose() * phi.terms()[j].frequency).norm() <= 1e-12);
  }
}

TEST_CASE("apply_mc examples") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto c = apply_mc(dc, 0.0, 1.0, [](const Vector&) { return 2.5; }, Vector::Zero(8), 1000, 1);
  CHECK(c.value == 2.5);
  CHECK(c.std_error == 0.0);

  auto cosine = apply_mc(dc, 0.0, 1.0, [](const Vector& y) { return std::cos(y(0)); }, Vector::Zero(8), 100000, 2);
  CHECK(std::abs(cosine.value - 0.8056014) <= 0.004);
  CHECK(std::abs(cosine.value - 0.8056014) <= 4 * cosine.std_error);

  const Vector x = Vector::Unit(8, 0);
  auto sq = apply_mc(dc, 0.0, 1.0, [](const Vector& y) { return y.squaredNorm(); }, x, 100000, 3);
  const double expected = 8 * 2 * kHalfQ10 + std::exp(-2.0);
  CHECK(std::abs(sq.value - expected) <= 4 * sq.std_error);
}

TEST_CASE("property: Monte Carlo agrees with the exact operator") {
  auto p = make_diagonal_paper(4, 1.0, 2.0);
  int within = 0;
  const int total = 100;
  for (int j = 0; j < total; ++j) {
    auto phi = probe_poly(4, j);
    const Vector x = Vector::LinSpaced(4, 0.1 * j / total, -0.2);
    const double exact = apply_exact(p, 0.0, 1.0, phi, x).real();
    auto mc = apply_mc(p, 0.0, 1.0, [&](const Vector& y) { return phi(y).real(); }, x, 20000, 100 + j);
    if (std::abs(mc.value - exact) <= 4 * mc.std_error) ++within;
  }
  CHECK(within >= total - 1);
}

TEST_CASE("generator examples") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto phi = TrigPolynomial::exponential(Vector::Unit(8, 0));
  for (double r : {-1.0, 0.0, 2.0}) CHECK(std::abs(generator_apply(dc, r, phi, Vector::Zero(8)) - Complex(-0.5)) <= 1e-15);
  CHECK(std::abs(generator_apply(dc, 0.0, TrigPolynomial::constant(8, 3.0), Vector::Ones(8))) == 0.0);

  Matrix dirs = Matrix::Zero(8, 1);
  dirs(0, 0) = 1.0;
  CylindricalFunction square(
      "square", [](const Vector& u) { return u(0) * u(0); }, [](const Vector& u) { return Vector(2.0 * u); },
      [](const Vector&) { return Matrix(2.0 * Matrix::Identity(1, 1)); }, dirs);
  for (double x1 : {0.0, 0.5, -1.3}) {
    Vector x = Vector::Zero(8);
    x(0) = x1;
    CHECK(generator_apply(dc, 0.0, square, x) == doctest::Approx(1.0 - 2.0 * x1 * x1));
  }
}

TEST_CASE("property: transported generator closed form against the numeric derivative") {
  for (const auto& name : {"diagonal-paper", "parabolic-1d"}) {
    auto m = make_model(name, {});
    for (int j = 0; j < 3; ++j) {
      auto phi = probe_poly(m.dim, j);
      const Vector x = Vector::LinSpaced(m.dim, 0.5, -0.5);
      const Complex closed = transported_generator(m, 0.0, 1.0, phi, x);
      const Complex numeric = transported_generator_numeric(m, 0.0, 1.0, phi, x);
      CHECK_MESSAGE(std::abs(closed - numeric) <= 1e-10 * std::max(1.0, std::abs(closed)), name);
    }
  }
}

TEST_CASE("differentiation formulas") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto phi = TrigPolynomial::exponential(Vector::Unit(8, 0));
  auto rep = check_differentiation(dc, 0.0, 1.0, phi, Vector::Unit(8, 0), 1e-4);
  CHECK(rep.discrepancy_s <= 1e-7);
  CHECK(rep.discrepancy_t <= 1e-7);

  auto one = check_differentiation(dc, 0.0, 1.0, TrigPolynomial::constant(8, 1.0), Vector::Unit(8, 0), 1e-4);
  CHECK(std::abs(one.fd_s) == 0.0);
  CHECK(std::abs(one.formula_s) == 0.0);
  CHECK(std::abs(one.fd_t) == 0.0);
  CHECK(std::abs(one.formula_t) == 0.0);

  auto p = make_diagonal_paper(4, 1.0, 2.0);
  auto coarse = check_differentiation(p, 0.0, 1.0, probe_poly(4, 0), Vector::LinSpaced(4, 0.5, -0.5), 1e-2);
  CHECK(coarse.ratio_s == doctest::Approx(4.0).epsilon(0.125));
  CHECK(coarse.ratio_t == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("gradient estimate") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  SmoothObservable constant{[](const Vector&) { return 1.0; }, [](const Vector& x) { return Vector(Vector::Zero(x.size())); }};
  auto zero = gradient_estimate_check(dc, 0.0, 1.0, constant, Vector::Zero(8), 1.0, 2000, 1);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  CHECK(zero.pass);

  SmoothObservable sine{[](const Vector& x) { return std::sin(x(0)); },
                        [](const Vector& x) {
                          Vector g = Vector::Zero(x.size());
                          g(0) = std::cos(x(0));
                          return g;
                        }};
  auto rep = gradient_estimate_check(dc, 0.0, 1.0, sine, Vector::Zero(8), measured_norm(dc, 0.0, 1.0, NormMode::CameronMartin),
                                     100000, 2);
  CHECK(rep.pass);
  CHECK(rep.lhs == doctest::Approx(std::exp(-1.0) * std::exp(-kHalfQ10)).epsilon(0.01));
  CHECK(rep.rhs > rep.lhs);

  auto p = make_diagonal_paper(4, 1.0, 2.0);
  const double factor = measured_norm(p, 0.0, 1.0, NormMode::CameronMartin);
  for (int j = 0; j < 20; ++j) {
    const Vector h = Vector::LinSpaced(4, 0.3 + 0.05 * j, -0.4);
    SmoothObservable phi{[h](const Vector& x) { return std::sin(h.dot(x)); },
                         [h](const Vector& x) { return Vector(std::cos(h.dot(x)) * h); }};
    const Vector x = Vector::LinSpaced(4, -0.1 * j, 0.05 * j);
    CHECK(gradient_estimate_check(p, 0.0, 1.0, phi, x, factor, 20000, 50 + j).pass);
  }
}
