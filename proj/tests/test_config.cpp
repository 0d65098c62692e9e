#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "ou/config.hpp"
#include "ou/error.hpp"

using namespace ou;

namespace {

ErrorCode parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::BadParameter;  // sentinel: parsed fine
}

}  // namespace

TEST_CASE("shipped configs parse") {
  for (const auto* name : {"dc", "paper", "nonunique", "parabolic", "hyper-beyond"}) {
    auto c = load_config(std::string(OULAB_CONFIG_DIR) + "/" + name + ".cfg");
    CHECK_NOTHROW(validate(c));
  }
  auto dc = load_config(std::string(OULAB_CONFIG_DIR) + "/dc.cfg");
  CHECK(dc.model == "diagonal-constant");
  CHECK(dc.dim() == 8);
  CHECK(dc.hyper_t == std::log(2.0));
  CHECK(dc.hyper_p == std::vector<double>{2.0, 2.5, 3.0});
  CHECK(dc.sharpness_p == std::vector<double>{4.5, 6.0});
}

TEST_CASE("empty window is rejected") {
  CHECK_THROWS_AS(load_config(std::string(OULAB_CONFIG_DIR) + "/invalid-window.cfg"), Error);
  CHECK(parse_error("[model]\nname = diagonal-constant\nt_min = 2\nt_max = -2\n") == ErrorCode::ConfigInvalid);
}

TEST_CASE("validation failures") {
  CHECK(parse_error("[model]\nnam = x\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[nosuch]\nx = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[model]\nn = 0\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[model]\nn = 2.5\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[tolerance]\nchain = 0\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[tolerance]\nderivative = -1e-6\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[run]\nworkers = 0\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[run]\nchecks = evolve, nonsense\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[hyper]\nq = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[diffcheck]\ns = 1\nt = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[mc]\ncount = abc\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[model]\nlambda = nan\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("[model]\nn = 3\n[spde]\nx0 = 1, 0\n") == ErrorCode::ConfigInvalid);
  CHECK(parse_error("this is not ini") == ErrorCode::ConfigInvalid);
}

TEST_CASE("defaults") {
  auto c = parse_config("");
  CHECK(c.model == "diagonal-constant");
  CHECK(c.workers == 1);
  CHECK(c.tol_chain == 1e-8);
  CHECK(c.checks.empty());
}

TEST_CASE("property: configs round-trip losslessly") {
  auto c = parse_config("");
  c.model = "diagonal-paper";
  c.params = {{"n", 4}, {"c1", 1.0 / 3.0}, {"c2", 2}, {"t_min", -2}, {"t_max", 2}};
  c.seed = 0;
  c.workers = 3;
  c.output = "some/dir";
  c.checks = {"evolve", "hyper"};
  c.s_values = {-1.0, 0.1, 0.30000000000000004};
  c.tol_invariance = 1e-6;
  c.hyper_t = std::log(2.0);
  c.hyper_assert = false;
  c.sharpness_p = {};
  c.spde_x0 = {1.0, 0.0, 0.0, std::nextafter(0.5, 1.0)};
  validate(c);
  const std::string text = to_ini(c);
  CHECK(parse_config(text) == c);
  CHECK(to_ini(parse_config(text)) == text);

  auto dc = load_config(std::string(OULAB_CONFIG_DIR) + "/paper.cfg");
  CHECK(parse_config(to_ini(dc)) == dc);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  const double x = std::log(2.0);
  CHECK(std::stod(format_double(x)) == x);
  CHECK(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
        std::numeric_limits<double>::denorm_min());
}
