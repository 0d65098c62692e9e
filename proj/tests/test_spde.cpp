#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ou/covariance.hpp"
#include "ou/evolution.hpp"
#include "ou/mehler.hpp"
#include "ou/spde.hpp"

using namespace ou;

TEST_CASE("noiseless diagonal ensemble follows U(t,s) x0") {
  auto m = make_diagonal_constant(3, -1.0, 0.0);
  const Vector x0 = Vector::LinSpaced(3, 1.0, -1.0);
  auto ens = simulate(m, 0.0, 1.0, x0, 1e-2, 50, 1);
  CHECK(ens.scheme == "exact-modewise");
  const Vector expected = evolve(m, 0.0, 1.0).matrix * x0;
  for (int j = 0; j < 50; ++j) CHECK((ens.terminal().col(j) - expected).norm() <= 1e-13);
  auto rep = law_check(ens, m);
  CHECK(rep.cov.norm() <= 1e-24);
  CHECK(rep.predicted_cov.norm() == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("constant model terminal law") {
  auto dc = make_diagonal_constant(8, -1.0, 1.0);
  const Vector x0 = Vector::Unit(8, 0);
  auto ens = simulate(dc, 0.0, 1.0, x0, 1e-2, 100000, 20240611);
  CHECK((ens.states.front().col(0) - x0).norm() == 0.0);
  auto rep = law_check(ens, dc);
  CHECK(rep.pass);
  CHECK(rep.max_mean_z <= 5.0);
  CHECK(rep.max_cov_z <= 5.0);
  CHECK(std::abs(rep.mean(0) - std::exp(-1.0)) <= 0.01);
  for (int k = 0; k < 8; ++k) CHECK(std::abs(rep.cov(k, k) - 0.4323) <= 0.01);
  CHECK(rep.mean_bias == 0.0);

  Vector h = Vector::Zero(8);
  h(0) = 0.8;
  h(1) = 0.6;
  double sum = 0, sum2 = 0;
  const auto& z = ens.terminal();
  for (int j = 0; j < z.cols(); ++j) {
    const double v = std::cos(h.dot(z.col(j)));
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(z.cols());
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  const double exact = apply_exact(dc, 0.0, 1.0, TrigPolynomial::cosine(h), x0).real();
  CHECK(std::abs(mean - exact) <= 4 * se);
}

TEST_CASE("fixed seed reproduces the ensemble") {
  auto p = make_diagonal_paper(3, 1.0, 2.0);
  const Vector x0 = Vector::Ones(3);
  auto a = simulate(p, 0.0, 0.5, x0, 1e-2, 300, 5);
  auto b = simulate(p, 0.0, 0.5, x0, 1e-2, 300, 5);
  CHECK((a.terminal() - b.terminal()).norm() == 0.0);
  auto c = simulate(p, 0.0, 0.5, x0, 1e-2, 300, 6);
  CHECK((a.terminal() - c.terminal()).norm() > 0.0);
}

TEST_CASE("Euler-Maruyama mean bias halves with the step") {
  auto m = make_scalar(2, [](double) { return -1.0; }, [](double) { return Matrix(Matrix::Zero(2, 2)); }, {-5.0, 5.0});
  const Vector x0 = Vector::Ones(2);
  const Vector exact = evolve(m, 0.0, 1.0).matrix * x0;
  auto coarse = simulate(m, 0.0, 1.0, x0, 2e-2, 4, 1);
  auto fine = simulate(m, 0.0, 1.0, x0, 1e-2, 4, 1);
  CHECK(coarse.scheme == "euler-maruyama");
  const double bias_coarse = (coarse.terminal().col(0) - exact).norm();
  const double bias_fine = (fine.terminal().col(0) - exact).norm();
  CHECK(bias_coarse / bias_fine == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("dense model law check with declared bias") {
  auto m = make_model("parabolic-1d", {});
  auto ens = simulate(m, 0.0, 0.5, Vector::Unit(m.dim, 0), 0.002, 20000, 3);
  auto rep = law_check(ens, m);
  CHECK(rep.pass);
  CHECK(rep.mean_bias > 0.0);
}

TEST_CASE("stability guard") {
  auto m = make_model("parabolic-1d", {});
  CHECK_THROWS_AS(simulate(m, 0.0, 0.5, Vector::Unit(m.dim, 0), 0.1, 10, 1), Error);
}

TEST_CASE("path recording and export") {
  auto dc = make_diagonal_constant(2, -1.0, 1.0);
  SimulateOptions opts;
  opts.record_every = 10;
  auto ens = simulate(dc, 0.0, 1.0, Vector::Ones(2), 1e-2, 3, 1, opts);
  CHECK(ens.steps == 100);
  CHECK(ens.times.size() == 11);
  CHECK(ens.times.back() == doctest::Approx(1.0));
  std::ostringstream out;
  write_ensemble_csv(out, ens);
  const std::string text = out.str();
  CHECK(text.find("path_id,time,coord,value") != std::string::npos);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) >= 3 * 11 * 2);
}
