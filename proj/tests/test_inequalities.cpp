#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ou/covariance.hpp"
#include "ou/inequalities.hpp"

using namespace ou;

namespace {

CylindricalFunction one_direction(int n, std::string name, std::function<double(double)> f,
                                  std::function<double(double)> df, std::function<double(double)> d2f) {
  Matrix dirs = Matrix::Zero(n, 1);
  dirs(0, 0) = 1.0;
  return CylindricalFunction(
      std::move(name), [f](const Vector& u) { return f(u(0)); },
      [df](const Vector& u) { return Vector(Vector::Constant(1, df(u(0)))); },
      [d2f](const Vector& u) { return Matrix(Matrix::Constant(1, 1, d2f(u(0)))); }, dirs);
}

struct DcSetup {
  OperatorFamily model = make_diagonal_constant(8, -1.0, 1.0);
  Matrix gamma = 0.5 * Matrix::Identity(8, 8);
  double s = 0.0;
  double t = std::log(2.0);
  HyperInput input = hyper_input(model, 0.0, std::log(2.0));
};

}  // namespace

TEST_CASE("kappa examples") {
  CHECK(kappa(1.0, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(kappa(1.0, 1.0, 0.25) == doctest::Approx(std::sqrt(std::numbers::pi / 2)).epsilon(1e-12));
  CHECK(kappa(1.0, 1.0, 0.25) == doctest::Approx(1.2533141).epsilon(1e-7));
  const double near_pole = kappa(1.0, 1.0, 0.49);
  CHECK(std::isfinite(near_pole));
  CHECK(near_pole == doctest::Approx(std::pow(2.0, -0.02) * std::tgamma(0.02)).epsilon(1e-12));
  CHECK(near_pole > kappa(1.0, 1.0, 0.4));
  try {
    kappa(1.0, 1.0, 0.5);
    FAIL("expected BadCertificate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadCertificate);
  }
}

TEST_CASE("p_max arithmetic and monotonicity") {
  CHECK(p_max(2.0, std::log(2.0), 0.5) == doctest::Approx(3.0).epsilon(1e-14));
  // a = -1 reading: p <= (q - 1) e^{t-s} + 1
  CHECK(p_max(3.0, 0.7, 0.5) == doctest::Approx(2.0 * std::exp(0.7) + 1.0));
  for (double tau = 0.1; tau < 3.0; tau += 0.3) {
    CHECK(p_max(2.0, tau + 0.1, 0.5) > p_max(2.0, tau, 0.5));
    CHECK(p_max(2.0, tau, 0.6) < p_max(2.0, tau, 0.5));
  }
}

TEST_CASE("entropy gap of a constant is zero") {
  DcSetup dc;
  auto c = one_direction(8, "const", [](double) { return 3.0; }, [](double) { return 0.0; }, [](double) { return 0.0; });
  for (double p : {1.5, 2.0}) {
    auto rep = entropy_gap(dc.model, 0.0, dc.gamma, c, p, 0.5, EntropyMethod::quadrature());
    CHECK(std::abs(rep.lhs) <= 1e-12);
    CHECK(rep.rhs == 0.0);
    CHECK(rep.verdict == Verdict::Pass);
    auto mc = entropy_gap(dc.model, 0.0, dc.gamma, c, p, 0.5, EntropyMethod::monte_carlo(10000, 4));
    CHECK(std::abs(mc.lhs) <= 1e-12);
    CHECK(mc.verdict == Verdict::Pass);
  }
}

TEST_CASE("entropy gap with a one-dimensional quadrature oracle") {
  DcSetup dc;
  auto phi = one_direction(
      8, "2+cos", [](double x) { return 2.0 + std::cos(x); }, [](double x) { return -std::sin(x); },
      [](double x) { return -std::cos(x); });
  auto rep = entropy_gap(dc.model, 0.0, dc.gamma, phi, 2.0, 0.5, EntropyMethod::quadrature());
  CHECK(rep.slack >= 0.0);

  // Independent trapezoid evaluation against N(0, 1/2).
  double m = 0, ent = 0, energy = 0;
  const double dx = 1e-3;
  for (double x = -12.0; x <= 12.0; x += dx) {
    const double w = std::exp(-x * x) / std::sqrt(std::numbers::pi) * dx;
    const double f = std::pow(2.0 + std::cos(x), 2);
    m += w * f;
    ent += w * f * std::log(f);
    energy += w * std::sin(x) * std::sin(x);
  }
  CHECK(rep.lhs == doctest::Approx(ent - m * std::log(m)).epsilon(1e-9));
  CHECK(rep.rhs == doctest::Approx(0.5 * 4.0 * energy).epsilon(1e-9));

  auto bump = one_direction(
      8, "gauss", [](double x) { return std::exp(-x * x / 4); }, [](double x) { return -x / 2 * std::exp(-x * x / 4); },
      [](double x) { return (x * x / 4 - 0.5) * std::exp(-x * x / 4); });
  auto b = entropy_gap(dc.model, 0.0, dc.gamma, bump, 1.5, 0.5, EntropyMethod::quadrature());
  CHECK(b.verdict == Verdict::Pass);
  CHECK(b.slack >= -3 * b.error);
}

TEST_CASE("property: log-Sobolev holds on the probe suite, and quadrature matches Monte Carlo") {
  DcSetup dc;
  const auto suite = logsob_probe_suite(8);
  CHECK(suite.size() >= 12);
  for (const auto& phi : suite) {
    for (double p : {1.5, 2.0, 3.0}) {
      auto quad = entropy_gap(dc.model, 0.0, dc.gamma, phi, p, 0.5, EntropyMethod::quadrature());
      CHECK_MESSAGE(quad.slack >= -3 * quad.error, phi.name);
      if (phi.active() == 1) {
        auto mc = entropy_gap(dc.model, 0.0, dc.gamma, phi, p, 0.5, EntropyMethod::monte_carlo(20000, 7));
        CHECK_MESSAGE(mc.slack >= -3 * mc.error, phi.name);
        CHECK_MESSAGE(std::abs(mc.lhs - quad.lhs) <= 4 * (mc.lhs_error + quad.lhs_error) + 1e-14, phi.name);
        CHECK_MESSAGE(std::abs(mc.rhs - quad.rhs) <= 4 * (mc.rhs_error + quad.rhs_error) + 1e-14, phi.name);
      }
    }
  }
}

TEST_CASE("hypercontractivity examples") {
  DcSetup dc;
  HyperOptions opts;
  opts.outer = 20000;
  auto one = hyper_check(dc.input, dc.s, dc.t, 2.0, 3.0, TrigPolynomial::constant(8, 1.0), "one", 0.5, opts);
  CHECK(one.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.verdict == Verdict::Pass);
  CHECK(one.p_max == doctest::Approx(3.0).epsilon(1e-12));

  opts.outer = 100000;
  auto phi = TrigPolynomial::constant(8, 2.0) + TrigPolynomial::cosine(Vector::Unit(8, 0));
  auto rep = hyper_check(dc.input, dc.s, dc.t, 2.0, 3.0, phi, "2+cos", 0.5, opts);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.lhs <= rep.rhs + 3 * rep.error());

  for (const auto& probe : hyper_probe_suite(8)) {
    auto c = hyper_check(dc.input, dc.s, dc.t, 2.0, 2.0, probe.phi, probe.name, 0.5, opts);
    CHECK_MESSAGE(c.verdict == Verdict::Pass, probe.name);
  }
}

TEST_CASE("p above the curve") {
  DcSetup dc;
  HyperOptions opts;
  opts.outer = 4096;
  auto phi = TrigPolynomial::cosine(Vector::Unit(8, 0));
  CHECK(hyper_check(dc.input, dc.s, dc.t, 2.0, 4.0, phi, "cos", 0.5, opts).verdict == Verdict::Fail);
  opts.asserted = false;
  CHECK(hyper_check(dc.input, dc.s, dc.t, 2.0, 4.0, phi, "cos", 0.5, opts).verdict == Verdict::Report);
}

TEST_CASE("property: hypercontractivity lattice") {
  HyperOptions opts;
  opts.outer = 20000;
  for (const auto& name : {"diagonal-constant", "diagonal-paper"}) {
    auto m = make_model(name, {});
    const double s = 0.0, t = std::log(2.0);
    auto cert = fit_decay(m, ordered_pairs({-1.0, -0.5, 0.0}, {0.25, 0.5, 1.0}), NormMode::CameronMartin);
    const double k = kappa(cert);
    auto input = hyper_input(m, s, t);
    auto suite = hyper_probe_suite(m.dim);
    for (double q : {1.5, 2.0, 3.0}) {
      const double curve = p_max(q, t - s, k);
      for (double frac : {0.5, 0.9, 1.0}) {
        const double p = std::max(1.0 + 1e-9, frac * curve);
        for (std::size_t j = 0; j < 3; ++j) {
          auto rep = hyper_check(input, s, t, q, p, suite[j].phi, suite[j].name, k, opts);
          CHECK_MESSAGE(rep.verdict == Verdict::Pass, name << " q=" << q << " p=" << p << " " << suite[j].name);
        }
      }
    }
  }
}

TEST_CASE("sharpness probe") {
  DcSetup dc;
  RampFamily fam;
  fam.direction = Vector::Unit(8, 0);
  auto at_curve = sharpness_probe(dc.input, dc.s, dc.t, 2.0, {3.0}, 0.5, fam);
  REQUIRE(at_curve.max_ratio.size() == 1);
  CHECK(at_curve.max_ratio[0] <= 1.0 + 1e-9);
  for (const auto& row : at_curve.rows) {
    CHECK(!row.violation);
    if (row.lambda == 0.0) CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto beyond = sharpness_probe(dc.input, dc.s, dc.t, 2.0, {6.0}, 0.5, fam);
  CHECK(beyond.max_ratio[0] > 1.0);
}
