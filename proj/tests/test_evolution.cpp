#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

#include "ou/evolution.hpp"
#include "ou/inequalities.hpp"
#include "ou/rng.hpp"

using namespace ou;

namespace {

OperatorFamily dense_random(int n, std::uint64_t seed) {
  rng::CounterStream stream(rng::seed_stream(seed, "dense-test"));
  Matrix a0(n, n), a1(n, n);
  std::uint64_t c = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a0(i, j) = stream.normal(c++) / n;
      a1(i, j) = stream.normal(c++) / n;
    }
  }
  a0 -= 1.5 * Matrix::Identity(n, n);
  DenseCoefficients coeffs;
  coeffs.A = [a0, a1](double t) { return Matrix(a0 + std::sin(t) * a1); };
  coeffs.B = [n](double) { return Matrix(Matrix::Identity(n, n)); };
  OperatorFamily f;
  f.name = "dense-random";
  f.dim = n;
  f.window = {-3.0, 3.0};
  f.coefficients = coeffs;
  f.noise_bound = 1.0;
  return f;
}

std::vector<OperatorFamily> sample_models() {
  std::vector<OperatorFamily> models;
  for (const auto& entry : model_catalog()) models.push_back(make_model(entry.name, {}));
  models.push_back(dense_random(4, 3));
  return models;
}

}  // namespace

TEST_CASE("t = s gives the identity") {
  for (const auto& m : sample_models()) {
    CHECK((evolve(m, 0.5, 0.5).matrix - Matrix::Identity(m.dim, m.dim)).norm() == 0.0);
    CHECK((adjoint_evolve(m, 0.5, 0.5).matrix - Matrix::Identity(m.dim, m.dim)).norm() == 0.0);
  }
}

TEST_CASE("closed-form evolution values") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  const Matrix u = evolve(dc, 0.0, 1.0).matrix;
  CHECK((u - std::exp(-1.0) * Matrix::Identity(8, 8)).norm() < 1e-15);
  CHECK(u(0, 0) == doctest::Approx(0.3678794).epsilon(1e-7));

  auto paper = make_diagonal_paper(1, 1.0, 2.0);
  CHECK(std::abs(evolve(paper, 0.0, 1.0).matrix(0, 0) - std::exp(-std::numbers::pi / 2)) <= 1e-10);
  CHECK(std::abs(evolve(paper, 0.0, 1.0).matrix(0, 0) - 0.2078795764) <= 1e-8);
}

TEST_CASE("constant-coefficient parabolic model matches the matrix exponential") {
  auto p = make_parabolic_1d(
      5, [](double, double) { return 1.0; }, [](double, double) { return -0.5; }, {-2.0, 2.0});
  const Matrix a = p.A(0.0);
  for (double tau : {0.01, 0.1, 0.5}) {
    const Matrix expected = (tau * a).exp();
    CHECK((evolve(p, 0.2, 0.2 + tau).matrix - expected).norm() <= 1e-9);
  }
}

TEST_CASE("property: chain law on random triples") {
  for (auto& m : sample_models()) {
    rng::CounterStream stream(rng::seed_stream(5, "triples"));
    const double lo = std::max(m.window.t_min, -2.0), hi = std::min(m.window.t_max, 2.0);
    for (std::uint64_t k = 0; k < 12; ++k) {
      double v[3];
      for (int i = 0; i < 3; ++i) v[i] = lo + (hi - lo) * stream.uniform(3 * k + i);
      std::sort(v, v + 3);
      const Matrix ust = evolve(m, v[0], v[2]).matrix;
      const Matrix chain = evolve(m, v[1], v[2]).matrix * evolve(m, v[0], v[1]).matrix;
      CHECK_MESSAGE((ust - chain).norm() <= 1e-8 * std::max(1.0, ust.norm()), m.name);
    }
  }
}

TEST_CASE("property: first-order finite-difference generator") {
  auto m = dense_random(3, 9);
  const double s = -0.3, t = 0.7;
  const Matrix u = evolve(m, s, t).matrix;
  double defect[2];
  int i = 0;
  for (double h : {1e-3, 1e-4}) {
    const Matrix du = (evolve(m, s, t + h).matrix - u) / h;
    defect[i++] = (du - m.A(t) * u).norm();
  }
  CHECK(defect[1] < defect[0]);
  CHECK(defect[0] / defect[1] == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("property: adjoint consistency") {
  for (auto& m : sample_models()) {
    const double s = std::max(m.window.t_min, -1.0), t = std::min(m.window.t_max, 1.2);
    const Matrix u = evolve(m, s, t).matrix;
    const Matrix v = adjoint_evolve(m, s, t).matrix;
    CHECK((v - u.transpose()).norm() <= 1e-8 * std::max(1.0, u.norm()));
    if (m.is_diagonal()) CHECK((v - u).norm() == 0.0);
  }
  auto d = dense_random(5, 21);
  const Matrix integrated = integrate_adjoint(d, -1.0, 1.5).matrix;
  CHECK((integrated - evolve(d, -1.0, 1.5).matrix.transpose()).norm() <= 1e-8);
}

TEST_CASE("evolve rejects reversed or out-of-window times") {
  auto p = make_diagonal_paper(2, 1.0, 2.0);
  CHECK_THROWS_AS(evolve(p, 1.0, 0.0), Error);
  CHECK_THROWS_AS(evolve(p, 0.0, 3.0), Error);
}

TEST_CASE("decay certificates") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  const auto pairs = ordered_pairs({0.0, 0.25, 0.5, 0.75, 1.0}, {0.5, 1.0, 1.5, 2.0});
  auto cm = fit_decay(dc, pairs, NormMode::CameronMartin);
  CHECK(std::abs(cm.C - 1.0) <= 1e-6);
  CHECK(std::abs(cm.eta - 1.0) <= 1e-6);
  CHECK(std::abs(cm.alpha) <= 1e-6);
  CHECK(cm.sound);
  CHECK(kappa(cm) == doctest::Approx(0.5).epsilon(1e-6));

  auto op = fit_decay(dc, pairs, NormMode::OperatorNorm);
  CHECK(std::abs(op.M - 1.0) <= 1e-6);
  CHECK(std::abs(op.zeta - 1.0) <= 1e-6);

  auto sc = make_scalar(3, [](double) { return -1.0; }, [](double) { return Matrix(2.0 * Matrix::Identity(3, 3)); },
                        {-5.0, 5.0});
  auto scm = fit_decay(sc, pairs, NormMode::CameronMartin);
  CHECK(std::abs(scm.C - 1.0) <= 1e-6);
  CHECK(std::abs(scm.eta - 1.0) <= 1e-6);
  CHECK(kappa(scm) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("single pair certificate interpolates exactly") {
  auto p = make_diagonal_paper(2, 1.0, 2.0);
  auto cert = fit_decay(p, {{0.0, 1.0}}, NormMode::OperatorNorm);
  CHECK(cert.residual <= 1e-14);
  CHECK(cert.evaluate(1.0) == doctest::Approx(cert.measured[0]).epsilon(1e-12));
  CHECK(ordered_pairs({0.0, 1.0}, {1.0}).size() == 1);
}

TEST_CASE("property: certificates majorize every sampled norm") {
  for (auto& m : sample_models()) {
    const double lo = std::max(m.window.t_min, -1.0);
    const auto pairs = ordered_pairs({lo, lo + 0.5, 0.0}, {0.25, 0.75, 1.0});
    for (auto mode : {NormMode::OperatorNorm, NormMode::CameronMartin}) {
      if (mode == NormMode::CameronMartin && m.name == "nonunique-demo") continue;
      auto cert = fit_decay(m, pairs, mode);
      CHECK_MESSAGE(cert.sound, m.name);
      for (std::size_t i = 0; i < pairs.size(); ++i) CHECK(cert.measured[i] <= cert.bound[i] * (1 + cert.fit_slack));
    }
  }
}
