#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ou/evolution.hpp"
#include "ou/model.hpp"

using namespace ou;

namespace {

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ou::Error");
  return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST_CASE("diagonal-paper coefficients at t = 0") {
  auto m = make_diagonal_paper(1, 1.0, 2.0);
  CHECK(m.a(1, 0.0) == doctest::Approx(-2.0));
  CHECK(m.b(1, 0.0) == doctest::Approx(2.0));
  const double sup_b = coefficient_supremum([&](double t) { return std::abs(m.b(1, t)); }, -2.0, 2.0);
  CHECK(sup_b == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("diagonal-paper model freezes history and has a common lambda_0") {
  auto m = make_diagonal_paper(4, 1.0, 2.0);
  CHECK(m.history_start == -2.0);
  CHECK(m.a(2, -7.0) == m.a(2, -2.0));
  REQUIRE(m.lambda_sup.size() == 4);
  double lambda0 = -std::numeric_limits<double>::infinity();
  for (double l : m.lambda_sup) lambda0 = std::max(lambda0, l);
  for (double l : m.lambda_sup) CHECK(l <= lambda0);
  for (double l : m.lambda_sup) CHECK(l <= 0.0);
}

TEST_CASE("diagonal constant model") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  CHECK(dc.dim == 8);
  CHECK(dc.closed_form);
  CHECK((dc.A(0.3) + Matrix::Identity(8, 8)).norm() == 0.0);
  CHECK((dc.Q(0.3) - Matrix::Identity(8, 8)).norm() == 0.0);
  CHECK(error_of([] { make_diagonal_constant(2, 0.0, 1.0); }) == ErrorCode::BadParameter);
  CHECK(error_of([] { make_diagonal_constant(0, -1.0, 1.0); }) == ErrorCode::BadParameter);
}

TEST_CASE("property: diagonal constant decay bound holds on a grid") {
  auto dc = make_diagonal_constant(3, -1.5, 0.7);
  REQUIRE(dc.decay.has_value());
  for (double s = -2.0; s <= 2.0; s += 0.5) {
    for (double t = s; t <= 3.0; t += 0.25) {
      const double norm = spectral_norm(evolve(dc, s, t).matrix);
      CHECK(norm <= dc.decay->M * std::exp(-dc.decay->zeta * (t - s)) * (1 + 1e-14));
    }
  }
}

TEST_CASE("scalar model reduces to the constant model") {
  ScalarOptions opts;
  opts.a_integral = [](double s, double t) { return -(t - s); };
  auto sc = make_scalar(4, [](double) { return -1.0; }, [](double) { return Matrix(Matrix::Identity(4, 4)); },
                        {-5.0, 5.0}, opts);
  auto dc = make_diagonal_constant(4, -1.0, 1.0);
  CHECK((evolve(sc, 0.0, 1.3).matrix - evolve(dc, 0.0, 1.3).matrix).norm() < 1e-15);
  CHECK((sc.Q(0.2) - dc.Q(0.2)).norm() == 0.0);
  CHECK(sc.decay->zeta == doctest::Approx(1.0));
}

TEST_CASE("scalar model sup of a(t) = -1 - sin(t)/2 is -1/2") {
  auto sc = make_scalar(2, [](double t) { return -1.0 - 0.5 * std::sin(t); },
                        [](double) { return Matrix(Matrix::Identity(2, 2)); }, {-5.0, 5.0});
  CHECK(sc.decay->zeta == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(error_of([] {
          make_scalar(2, [](double) { return 0.1; }, [](double) { return Matrix(Matrix::Identity(2, 2)); },
                      {-1.0, 1.0});
        }) == ErrorCode::BadParameter);
}

TEST_CASE("parabolic stencil with constant coefficients") {
  auto p = make_parabolic_1d(
      3, [](double, double) { return 1.0; }, [](double, double) { return 0.0; }, {-1.0, 1.0});
  Matrix expected(3, 3);
  expected << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  expected *= 16.0;
  CHECK((p.A(0.0) - expected).norm() < 1e-12);
  CHECK((p.A(0.7) - p.A(-0.4)).norm() == 0.0);
}

TEST_CASE("parabolic with reaction -1 has eigenvalues at most -1") {
  auto p = make_parabolic_1d(
      6, [](double, double) { return 1.0; }, [](double, double) { return -1.0; }, {-1.0, 1.0});
  CHECK(spectral(p.A(0.0)).max_eigenvalue() <= -1.0);
  CHECK(error_of([] {
          make_parabolic_1d(
              3, [](double, double) { return 1.0; }, [](double, double) { return 0.5; }, {-1.0, 1.0});
        }) == ErrorCode::BadParameter);
}

TEST_CASE("nonunique demo mode one") {
  auto m = make_nonunique_demo(3);
  CHECK(m.a(1, 0.0) == 0.0);
  CHECK(m.lambda_sup[0] == doctest::Approx(0.0).epsilon(1e-12));
  for (double t = -10; t <= 10; t += 0.5) CHECK(m.a(1, t) <= 0.0);
  const double m0 = m.mode_one_scale(0.0);
  CHECK(m0 > 0.0);
  CHECK(m0 <= 1.0);
  CHECK(std::stod(m.metadata.at("m0_quadrature")) == doctest::Approx(m0).epsilon(1e-10));
  CHECK(nonunique_mode_one_antiderivative(1e6) == doctest::Approx(std::numbers::pi / std::numbers::sqrt2));
  CHECK(error_of([] { make_nonunique_demo(1); }) == ErrorCode::BadParameter);
}

TEST_CASE("property: A_star is the transpose for every catalog model") {
  for (const auto& entry : model_catalog()) {
    auto m = make_model(entry.name, {});
    for (double t : {-0.5, 0.0, 0.8}) {
      const Matrix a = m.A(t);
      const double tol = m.is_diagonal() ? 0.0 : 1e-12 * std::max(1.0, a.norm());
      CHECK((m.A_star(t) - a.transpose()).norm() <= tol);
    }
  }
}

TEST_CASE("catalog construction") {
  CHECK(model_catalog().size() == 5);
  auto m = make_model("diagonal-constant", {{"n", 3}, {"lambda", -2}});
  CHECK(m.dim == 3);
  CHECK(m.a(1, 0.0) == -2.0);
  CHECK(error_of([] { make_model("no-such-model", {}); }) == ErrorCode::BadParameter);
}

TEST_CASE("window checks") {
  auto m = make_diagonal_paper(2, 1.0, 2.0);
  CHECK(error_of([&] { m.require_window(-3.0, 0.0); }) == ErrorCode::WindowExceeded);
  CHECK(error_of([&] { m.require_window(1.0, 0.0); }) == ErrorCode::WindowExceeded);
  m.require_window(-2.0, 2.0);
}

TEST_CASE("result cache") {
  auto m = make_diagonal_constant(2, -1.0, 1.0);
  ResultCache::Entry e;
  e.value = Matrix::Identity(2, 2);
  m.cache.store(ResultCache::Evolution, 0.0, 1.0, 1e-12, 0.0, e);
  ResultCache::Entry out;
  CHECK(m.cache.find(ResultCache::Evolution, 0.0, 1.0, 1e-12, 0.0, out));
  CHECK(!m.cache.find(ResultCache::Kernel, 0.0, 1.0, 1e-12, 0.0, out));
  auto copy = m;
  CHECK(copy.cache.size() == 0);
}
