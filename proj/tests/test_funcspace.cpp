#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tangentia/errors.hpp"
#include "tangentia/functions.hpp"

using namespace tangentia;
using namespace tangentia::funcspace;

namespace {

// Antiderivative of the tent, used as an independent closed form for its averages.
double tent_primitive(double y) {
  if (y <= -1) return 0.0;
  if (y <= 0) return 0.5 * (y + 1) * (y + 1);
  if (y <= 1) return 1.0 - 0.5 * (1 - y) * (1 - y);
  return 1.0;
}

double tent_average(double x, double r) { return (tent_primitive(x + r) - tent_primitive(x - r)) / (2 * r); }

Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST_CASE("unit ball and sphere measures") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3));
  CHECK(unit_sphere_area(2) == doctest::Approx(2 * std::numbers::pi));
  CHECK(unit_sphere_area(3) == doctest::Approx(4 * std::numbers::pi));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(8, x, w);
  double s0 = 0, s14 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s14 += w[i] * std::pow(x[i], 14);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s14 == doctest::Approx(2.0 / 15).epsilon(1e-13));
}

TEST_CASE("1D ball average of the tent matches its closed form") {
  const auto f = functions::tent();
  for (double x : {0.0, 0.3, 1.0, 2.0, -2.5}) {
    for (double r : {0.01, 0.5, 1.0, std::sqrt(7.0), 10.0}) {
      CHECK(std::abs(ball_average(f, v1(x), r) - tent_average(x, r)) < 1e-12);
    }
  }
  CHECK(ball_average(f, v1(0.25), 0.0) == 0.75);
}

TEST_CASE("ball averages of |y|^2 in 2D and 3D") {
  for (int n : {2, 3}) {
    Eigen::MatrixXd a = 2.0 * Eigen::MatrixXd::Identity(n, n);
    const auto f = functions::quadratic(a, Vec::Zero(n));
    Vec x = Vec::LinSpaced(n, 0.3, -0.7);
    for (double r : {0.1, 1.0, 3.0}) {
      const double exact = x.squaredNorm() + n * r * r / (n + 2.0);
      CHECK(std::abs(ball_average(f, x, r) - exact) < 1e-10 * (1 + exact));
    }
  }
}

TEST_CASE("sphere derivative is exact for linear and quadratic functions") {
  for (int n : {1, 2, 3}) {
    Vec a = Vec::LinSpaced(n, 1.5, -0.5);
    Vec theta = Vec::Ones(n).normalized();
    Vec x = Vec::Constant(n, 0.2);
    const auto lin = functions::linear(a, 3.0);
    CHECK(std::abs(sphere_average_derivative(lin, x, 0.7, theta) - a.dot(theta)) < 1e-12);
    Eigen::MatrixXd q = 2.0 * Eigen::MatrixXd::Identity(n, n);
    const auto sq = functions::quadratic(q, Vec::Zero(n));
    CHECK(std::abs(sphere_average_derivative(sq, x, 0.7, theta) - 2 * x.dot(theta)) < 1e-10);
  }
}

TEST_CASE("sphere derivative of the tent agrees with differentiating the closed form") {
  const auto f = functions::tent();
  for (double x : {0.4, 2.0, -1.7}) {
    for (double r : {0.5, 2.0}) {
      const double h = 1e-6;
      const double fd = (tent_average(x + h, r) - tent_average(x - h, r)) / (2 * h);
      CHECK(std::abs(sphere_average_derivative(f, v1(x), r, v1(1.0)) - fd) < 1e-6);
    }
  }
}

TEST_CASE("ball average rejects nonfinite integrands and bad radii") {
  DirectionalFunction f(1, [](const Vec& x) { return x[0] > 0.5 ? std::nan("") : 0.0; });
  CHECK_THROWS_AS(ball_average(f, v1(0.0), 1.0), DomainError);
  CHECK_THROWS_AS(ball_average(functions::tent(), v1(0.0), -1.0), ArgumentError);
}

TEST_CASE("absolute value and scaling keep structure") {
  const auto f = functions::linear(Vec{{2.0}}, -1.0);
  const auto g = absolute(f);
  CHECK(g(v1(0.0)) == 1.0);
  CHECK(*g.exact_derivative(v1(0.0), v1(1.0)) == -2.0);
  CHECK(*g.exact_derivative(v1(0.5), v1(-1.0)) == 2.0);
  CHECK(*g.lipschitz() == 2.0);
  const auto h = scaled(functions::tent(), -2.0);
  CHECK(h(v1(0.5)) == -1.0);
  CHECK(*h.exact_derivative(v1(0.0), v1(1.0)) == 2.0);
}

TEST_CASE("grid functions interpolate multilinear data exactly") {
  const std::string csv =
      "2,3,2,0,0,2,1\n"
      "0,1\n"
      "1,2\n"
      "2,3\n";
  const auto g = GridFunction::parse_csv(csv);
  CHECK(g.dim() == 2);
  CHECK(g(Vec{{1.5, 0.25}}) == doctest::Approx(1.75));
  CHECK(g(Vec{{2.0, 1.0}}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(g(Vec{{2.1, 0.0}}), DomainError);
  const auto f = g.as_function();
  CHECK(f(Vec{{0.5, 0.5}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(GridFunction::parse_csv("2,3,2,0,0,2,1\n1,2,3\n"), ArgumentError);
  CHECK_THROWS_AS(GridFunction::parse_csv("2,3,2,0,0,2\n"), ArgumentError);
  CHECK_THROWS_AS(GridFunction::parse_csv("1,2,0,1\n0,abc\n"), ArgumentError);
}
