#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "tangentia/errors.hpp"
#include "tangentia/functions.hpp"
#include "tangentia/maxop.hpp"

using namespace tangentia;
using namespace tangentia::maxop;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST_CASE("constant function: every radius is best") {
  const auto one = functions::constant(1, 1.0);
  const auto rs = maximal(one, v1(0.3), 0.0, RadiusSearch{.r_max = 50.0});
  CHECK(rs.value == doctest::Approx(1.0));
  CHECK(rs.contains_zero());
  CHECK(rs.contains_infinity());
  REQUIRE(rs.plateaus.size() == 1);
  CHECK(rs.plateaus[0].lo == 0.0);
  CHECK(std::isinf(rs.plateaus[0].hi));
  CHECK(maximal_directional_derivative(one, v1(0.3), v1(1.0), 0.0).value == 0.0);
}

TEST_CASE("tent at its peak: best radius 0") {
  const auto rs = maximal(functions::tent(), v1(0.0), 0.0);
  CHECK(rs.value == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(rs.radii.size() == 1);
  CHECK(rs.radii[0].kind == RadiusKind::Zero);
  CHECK(rs.plateaus.empty());
}

TEST_CASE("tent at x = 2: value and best radius match the closed form") {
  const auto rs = maximal(functions::tent(), v1(2.0), 0.0);
  CHECK(std::abs(rs.value - (3 - std::sqrt(7.0)) / 2) < 1e-9);
  const auto radii = rs.finite_radii();
  REQUIRE(radii.size() == 1);
  CHECK(std::abs(radii[0] - std::sqrt(7.0)) < 1e-6);
  CHECK(!rs.contains_zero());
  CHECK(!rs.contains_infinity());
  CHECK(rs.warnings.empty());
  const auto brute = oracle::tent_maximal(2.0, 0.0);
  CHECK(std::abs(rs.value - brute.value) < 1e-9);
}

TEST_CASE("tent at x = 0.5: best radii form the plateau [0, 0.5]") {
  const auto rs = maximal(functions::tent(), v1(0.5), 0.0);
  CHECK(rs.value == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(rs.plateaus.size() == 1);
  CHECK(rs.plateaus[0].lo == 0.0);
  // The average leaves the plateau quadratically, so the tie band is about sqrt(1e-8) wide.
  CHECK(std::abs(rs.plateaus[0].hi - 0.5) < 5e-3);
}

TEST_CASE("restricted operator at the tent peak") {
  const auto rs = maximal(functions::tent(), v1(0.0), 1.0);
  CHECK(std::abs(rs.value - 0.5) < 1e-12);
  REQUIRE(rs.radii.size() == 1);
  CHECK(rs.radii[0].r == 1.0);
  for (double t : {1.0, -1.0}) {
    const auto d = maximal_directional_derivative(functions::tent(), v1(0.0), v1(t), 1.0);
    CHECK(std::abs(d.value) < 1e-12);
  }
}

TEST_CASE("envelope formula agrees with the brute-force slope on [1.2, 3]") {
  const auto f = functions::tent();
  for (double x : {1.2, 1.5, 2.0, 2.5, 3.0}) {
    const double r = std::sqrt((1 + x) * (1 + x) - 2);
    const double closed = -(1 + x - r) / (2 * r);
    const auto d = maximal_directional_derivative(f, v1(x), v1(1.0), 0.0);
    CHECK(std::abs(d.value - closed) < 1e-7);
    CHECK(std::abs(d.value - oracle::tent_maximal_slope(x, 0.0)) < 1e-3);
    const auto back = maximal_directional_derivative(f, v1(x), v1(-1.0), 0.0);
    CHECK(std::abs(back.value + closed) < 1e-7);
  }
}

TEST_CASE("the lambda = 0 formula refuses kinks") {
  CHECK_THROWS_AS(maximal_directional_derivative(functions::tent(), v1(1.0), v1(1.0), 0.0), PreconditionError);
  CHECK_THROWS_AS(maximal_directional_derivative(functions::tent(), v1(0.0), v1(1.0), 0.0), PreconditionError);
  DirectionalFunction no_oracle(1, [](const Vec& x) { return oracle::tent(x[0]); });
  CHECK_THROWS_AS(maximal_directional_derivative(no_oracle, v1(-1.0), v1(1.0), 0.0), PreconditionError);
  CHECK_NOTHROW(maximal_directional_derivative(functions::tent(), v1(1.0), v1(1.0), 0.5));
}

TEST_CASE("best radii of nearby points accumulate at the best radius") {
  for (double x : {2.0 - 1e-3, 2.0 + 1e-3}) {
    const auto rs = maximal(functions::tent(), v1(x), 0.0);
    for (double r : rs.finite_radii()) CHECK(std::abs(r - std::sqrt(7.0)) < 1e-2);
  }
}

TEST_CASE("monotone in lambda and blind to the sign of f") {
  const auto f = functions::tent();
  const auto neg = funcspace::scaled(f, -1.0);
  for (double x : {-2.0, 0.0, 0.4, 1.5, 3.0}) {
    double previous = 1e300;
    for (double lambda : {0.0, 0.25, 1.0, 2.0, 4.0}) {
      const double m = maximal(f, v1(x), lambda).value;
      CHECK(m <= previous + 1e-12);
      previous = m;
      CHECK(std::abs(maximal(neg, v1(x), lambda).value - m) < 1e-12);
    }
  }
}

TEST_CASE("maximal field is row-major and parallel-safe") {
  const auto field = maximal_field(functions::tent(), Box{v1(-3), v1(3)}, {7}, 0.0);
  REQUIRE(field.size() == 7);
  for (std::size_t i = 0; i < field.size(); ++i) {
    CHECK(field[i].x[0] == doctest::Approx(-3.0 + i));
    CHECK(std::abs(field[i].value - oracle::tent_maximal(-3.0 + i, 0.0).value) < 1e-8);
  }
}

TEST_CASE("translation bound") {
  Eigen::MatrixXd two = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const auto sq = functions::quadratic(two, v1(0.0));
  const double u = remainder_sup(sq, v1(0), v1(0), 0.6);
  CHECK(std::abs(u - 0.6) < 1e-12);
  const auto rep = check_translation_bound(sq, v1(0), v1(0.1), 0.5, v1(0), u);
  CHECK(std::abs(rep.lhs - 0.01) < 1e-10);
  CHECK(rep.ratio == doctest::Approx(1.0 / 6));
  CHECK(rep.pass);
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["check"] == "translation-bound");
  CHECK(j["pass"] == true);

  const auto lin = functions::linear(Vec{{1.0, -2.0}}, 0.5);
  const auto zero = check_translation_bound(lin, Vec{{0.1, 0.2}}, Vec{{0.05, 0.0}}, 0.3, Vec{{1.0, -2.0}}, 0.0);
  CHECK(zero.lhs < 1e-10);
  CHECK(zero.pass);

  const auto tent_rep = check_translation_bound(functions::tent(), v1(0.5), v1(0.01), 0.1, v1(-1.0), 0.0);
  CHECK(tent_rep.lhs < 1e-10);
  CHECK(tent_rep.pass);

  // A wrong D with u_sup = 0 is a violation.
  const auto bad = check_translation_bound(lin, Vec{{0.0, 0.0}}, Vec{{0.1, 0.0}}, 0.3, Vec{{0.0, 0.0}}, 0.0);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("Lipschitz audits") {
  const auto one = functions::constant(1, 1.0);
  const auto a = lipschitz_audit(one, 0.5, Box{v1(-1), v1(1)}, 10, 1, RadiusSearch{.grid_points = 64, .r_max = 20.0});
  CHECK(a.measured < 1e-9);
  CHECK(a.pass);
  const auto t = lipschitz_audit(functions::tent(), 1.0, Box{v1(-3), v1(3)}, 40, 2, RadiusSearch{.grid_points = 128});
  CHECK(t.measured <= 1.0);
  CHECK(t.pass);
}
