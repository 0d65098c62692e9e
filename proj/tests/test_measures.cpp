#include <doctest.h>

#include <cmath>

#include "ou/covariance.hpp"
#include "ou/evolution.hpp"
#include "ou/measures.hpp"
#include "ou/mehler.hpp"

using namespace ou;

TEST_CASE("characteristic function examples") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto gamma = gaussian_system(dc).measure(0.0);
  CHECK(std::abs(gamma.char_fn(Vector::Zero(8)) - Complex(1.0)) == 0.0);
  CHECK(std::abs(gamma.char_fn(Vector::Unit(8, 0)) - Complex(std::exp(-0.25))) <= 1e-12);
  CHECK(std::abs(gamma.char_fn(Vector::Unit(8, 0)).real() - 0.7788008) <= 1e-7);

  Vector h = Vector::LinSpaced(8, 0.3, -0.4);
  Vector v = Vector::Unit(8, 0) * 1.7;
  const Complex shifted = gamma.shifted(v).char_fn(h);
  const Complex expected = gamma.char_fn(h) * std::exp(Complex(0, h.dot(v)));
  CHECK(std::abs(shifted - expected) <= 1e-14);
}

TEST_CASE("convolution with a point mass equals the mean-shifted measure") {
  auto p = make_diagonal_paper(3, 1.0, 2.0);
  const double t = 0.5;
  const double m1 = 0.8;
  auto sys = shifted_system(p, [m1](double) { return Vector(Vector::Unit(3, 0) * m1); }, "test");
  auto direct = GaussianMeasure(Vector::Unit(3, 0) * m1, q_infinity(p, t).Q);
  for (const auto& h : make_probes(3, 10, 4)) CHECK(std::abs(sys.measure(t).char_fn(h) - direct.char_fn(h)) <= 1e-12);
}

TEST_CASE("sampling") {
  Vector mean(3);
  mean << 1, -2, 0.5;
  GaussianMeasure point(mean, Matrix::Zero(3, 3));
  const Matrix draws = sample(point, 100, 9);
  for (int j = 0; j < draws.cols(); ++j) CHECK((draws.col(j) - mean).norm() == 0.0);

  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto gamma = gaussian_system(dc).measure(0.0);
  const std::size_t count = 100000;
  const Matrix x = sample(gamma, count, 17);
  CHECK(x.cols() == static_cast<Eigen::Index>(count));
  const Vector m = x.rowwise().mean();
  const Matrix centered = x.colwise() - m;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(count - 1);
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(m(i)) <= 4.0 * std::sqrt(0.5 / count));
    CHECK(std::abs(cov(i, i) - 0.5) <= 0.02);
    for (int j = 0; j < 8; ++j) {
      const double qij = i == j ? 0.5 : 0.0;
      CHECK(std::abs(cov(i, j) - qij) <= 5.0 * std::sqrt(0.25 + qij * qij) / std::sqrt(double(count)));
    }
  }
  CHECK((sample(gamma, 1000, 17) - x.leftCols(1000)).norm() == 0.0);
  CHECK((sample(gamma, 1000, 17) - sample(gamma, 1000, 18)).norm() > 0.0);
}

TEST_CASE("degenerate covariance samples through the spectral factor") {
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 2.0;
  GaussianMeasure mu(Vector::Zero(2), q);
  const Matrix x = sample(mu, 500, 1);
  CHECK(x.row(1).norm() == 0.0);
  CHECK(x.row(0).norm() > 0.0);
}

TEST_CASE("mean functional examples") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  auto gamma = gaussian_system(dc).measure(0.0);
  CHECK(std::abs(mean_functional(gamma, TrigPolynomial::constant(8, 1.0)) - Complex(1.0)) == 0.0);
  CHECK(std::abs(mean_functional(gamma, TrigPolynomial::cosine(Vector::Unit(8, 0))) - std::exp(-0.25)) <= 1e-12);
  GaussianMeasure dirac(Vector::Zero(4), Matrix::Zero(4, 4));
  CHECK(std::abs(mean_functional(dirac, TrigPolynomial::exponential(Vector::Ones(4))) - Complex(1.0)) == 0.0);
}

TEST_CASE("invariance of gamma for the constant model") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  const auto pairs = ordered_pairs({0.0, 0.5, 1.0}, {0.5, 1.0, 2.0});
  auto rep = verify_invariance(gaussian_system(dc), dc, pairs, make_probes(8, 32, 1));
  CHECK(rep.pass);
  CHECK(rep.max_discrepancy <= 1e-12);
  CHECK(rep.probe_count == 32);
  CHECK(rep.form_agreement <= 1e-10);

  auto same = verify_invariance(gaussian_system(dc), dc, {{0.7, 0.7}}, make_probes(8, 10, 1));
  CHECK(same.max_discrepancy <= 1e-15);
}

TEST_CASE("non-uniqueness: both systems are invariant") {
  auto m = make_nonunique_demo(3);
  const auto pairs = ordered_pairs({-2.0, -1.0, 0.0, 1.0}, {-0.5, 0.5, 1.5, 2.0});
  const auto probes = make_probes(3, default_probe_count(3), 2);
  auto gamma = verify_invariance(gaussian_system(m), m, pairs, probes, 1e-6);
  auto shifted = verify_invariance(nonunique_shifted_system(m), m, pairs, probes, 1e-6);
  CHECK(gamma.pass);
  CHECK(shifted.pass);
  CHECK(shifted.form_agreement <= 1e-10);
  // The two systems are genuinely different measures.
  const Vector e1 = Vector::Unit(3, 0);
  CHECK(std::abs(gaussian_system(m).measure(0.0).char_fn(e1) - nonunique_shifted_system(m).measure(0.0).char_fn(e1)) >
        1e-3);
}

TEST_CASE("the literal e1 / m_t shift is not an evolution system") {
  auto m = make_nonunique_demo(3);
  auto scale = m.mode_one_scale;
  auto literal = shifted_system(m, [scale](double t) { return Vector(Vector::Unit(3, 0) / scale(t)); }, "literal");
  const auto pairs = ordered_pairs({-2.0, 0.0}, {0.5, 2.0});
  auto rep = verify_invariance(literal, m, pairs, make_probes(3, 8, 2), 1e-6);
  CHECK(!rep.pass);
  CHECK(rep.max_discrepancy > 1e-3);
}

TEST_CASE("property: probe sets") {
  const auto probes = make_probes(4, default_probe_count(4), 3);
  CHECK(probes.size() == 24);
  CHECK((probes[0] - Vector::Unit(4, 0)).norm() == 0.0);
  CHECK((probes[4] - (Vector::Unit(4, 0) + Vector::Unit(4, 1))).norm() == 0.0);
  CHECK((probes[7] - Vector::Ones(4)).norm() == 0.0);
  for (std::size_t i = 8; i < probes.size(); ++i) CHECK(probes[i].norm() == doctest::Approx(1.0));
  const auto again = make_probes(4, 24, 3);
  for (std::size_t i = 0; i < probes.size(); ++i) CHECK((probes[i] - again[i]).norm() == 0.0);
  CHECK(make_probes(4, 3, 3).size() == 3);
}

TEST_CASE("ergodic limit") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  const Vector e1 = Vector::Unit(8, 0);
  auto phi = TrigPolynomial::exponential(e1);
  auto rep = verify_ergodic_limit(dc, 0.0, e1, {-1.0, -2.0, -4.0, -8.0}, phi, 1e-3);
  CHECK(rep.pass);
  CHECK(rep.monotone);
  CHECK(std::abs(rep.limit - std::exp(-0.25)) <= 1e-12);
  CHECK(rep.final_distance <= 1e-3);

  auto one = verify_ergodic_limit(dc, 0.0, e1, {-1.0, -2.0}, TrigPolynomial::constant(8, 1.0), 1e-3);
  for (const auto& row : one.rows) CHECK(row.distance <= 1e-15);

  auto origin = verify_ergodic_limit(dc, 0.0, Vector::Zero(8), {-1.0, -3.0}, phi, 1e-3);
  for (const auto& row : origin.rows) {
    const double q = (1.0 - std::exp(2.0 * row.s)) / 2.0;
    CHECK(row.distance == doctest::Approx(std::abs(std::exp(-q / 2) - std::exp(-0.25))).epsilon(1e-10));
  }
}
