#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tangentia/errors.hpp"
#include "tangentia/semilinear.hpp"

using namespace tangentia;
using namespace tangentia::semilinear;

namespace {

Vec v2(double a, double b) { return Vec{{a, b}}; }
Vec v3(double a, double b, double c) { return Vec{{a, b, c}}; }

// Hausdorff distance of two planar cone-ball sets by brute force over a fine
// polar grid of both sets (independent of the library's projection formula).
double brute_hc_2d(const SemiLinearSubspace& a, const SemiLinearSubspace& b) {
  std::vector<Vec> pa, pb;
  const int angles = 720, radii = 16;
  for (int i = 0; i < angles; ++i) {
    const double phi = 2 * std::numbers::pi * i / angles;
    const Vec u = v2(std::cos(phi), std::sin(phi));
    for (int j = 0; j <= radii; ++j) {
      const Vec p = u * (static_cast<double>(j) / radii);
      if (a.contains(u, 1e-9)) pa.push_back(p);
      if (b.contains(u, 1e-9)) pb.push_back(p);
    }
  }
  pa.push_back(Vec::Zero(2));
  pb.push_back(Vec::Zero(2));
  auto directed = [](const std::vector<Vec>& from, const std::vector<Vec>& to) {
    double worst = 0;
    for (const auto& p : from) {
      double best = 1e300;
      for (const auto& q : to) best = std::min(best, (p - q).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

}  // namespace

TEST_CASE("canonical form absorbs opposite rays and drops redundant ones") {
  const SemiLinearSubspace w(2, {}, {v2(1, 0), v2(-2, 0)});
  CHECK(w.linear_dim() == 1);
  CHECK(w.rays().empty());
  CHECK(w.equals(SemiLinearSubspace::span({v2(1, 0)})));

  const SemiLinearSubspace h(3, {v3(1, 0, 0)}, {v3(1, 1, 0), v3(0, 2, 0)});
  CHECK(h.linear_dim() == 1);
  REQUIRE(h.rays().size() == 1);
  CHECK((h.rays()[0] - v3(0, 1, 0)).norm() < 1e-12);

  const SemiLinearSubspace inside(2, {v2(1, 1)}, {v2(2, 2)});
  CHECK(inside.rays().empty());
  CHECK_THROWS_AS(SemiLinearSubspace(3, {}, {v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1)}), ArgumentError);
}

TEST_CASE("canonicalisation is idempotent") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec> lin, rays;
    const int nl = trial % 2, nr = trial % 3;
    for (int i = 0; i < nl; ++i) lin.push_back(v3(g(rng), g(rng), g(rng)));
    for (int i = 0; i < nr; ++i) rays.push_back(v3(g(rng), g(rng), g(rng)));
    const SemiLinearSubspace w(3, lin, rays);
    std::vector<Vec> lin2;
    for (Eigen::Index c = 0; c < w.linear_basis().cols(); ++c) lin2.push_back(w.linear_basis().col(c));
    const SemiLinearSubspace again(3, lin2, w.rays());
    CHECK(again.linear_dim() == w.linear_dim());
    REQUIRE(again.rays().size() == w.rays().size());
    CHECK((again.linear_basis() - w.linear_basis()).norm() < 1e-12);
    for (std::size_t i = 0; i < w.rays().size(); ++i) CHECK((again.rays()[i] - w.rays()[i]).norm() < 1e-12);
  }
}

TEST_CASE("projection onto cones") {
  const auto quadrant = SemiLinearSubspace(2, {}, {v2(1, 0), v2(0, 1)});
  CHECK((quadrant.project(v2(-1, -1))).norm() < 1e-15);
  CHECK((quadrant.project(v2(2, -1)) - v2(2, 0)).norm() < 1e-15);
  CHECK((quadrant.project(v2(0.3, 0.4)) - v2(0.3, 0.4)).norm() < 1e-15);
  const auto half = halfspace(SemiLinearSubspace::span({v3(0, 0, 1)}), v3(1, 0, 0));
  CHECK((half.project(v3(-1, 2, 3)) - v3(0, 0, 3)).norm() < 1e-14);
  CHECK(half.contains(v3(2, 0, -5)));
  CHECK(!half.contains(v3(-2, 0, -5)));
}

TEST_CASE("parse accepts the textual forms") {
  CHECK(SemiLinearSubspace::parse(2, "full").equals(SemiLinearSubspace::whole(2)));
  CHECK(SemiLinearSubspace::parse(2, "0").is_trivial());
  const auto w = SemiLinearSubspace::parse(3, "V=[0,0,1];ray=[1,0,0]");
  CHECK(w.linear_dim() == 1);
  CHECK(w.rays().size() == 1);
  CHECK_THROWS(SemiLinearSubspace::parse(2, "V=[1,2,3]"));
  CHECK_THROWS(SemiLinearSubspace::parse(2, "bogus"));
}

TEST_CASE("sampled unit vectors lie in W, are unit, and are deterministic") {
  const std::vector<SemiLinearSubspace> cases{
      SemiLinearSubspace::whole(1),
      SemiLinearSubspace::ray(Vec::Constant(1, 1.0)),
      SemiLinearSubspace::whole(2),
      SemiLinearSubspace(2, {}, {v2(1, 0), v2(0, 1)}),
      halfspace(SemiLinearSubspace::span({v2(0, 1)}), v2(1, 0)),
      SemiLinearSubspace::whole(3),
      halfspace(SemiLinearSubspace::span({v3(1, 0, 0), v3(0, 1, 0)}), v3(0, 0, 1)),
      SemiLinearSubspace(3, {}, {v3(1, 0, 0), v3(0, 1, 1)}),
      SemiLinearSubspace::span({v3(1, 1, 0)}),
  };
  for (const auto& w : cases) {
    const auto a = sample_unit_vectors(w, 40, 5);
    const auto b = sample_unit_vectors(w, 40, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i].norm() - 1.0) < 1e-12);
      CHECK(w.contains(a[i], 1e-9));
      CHECK(a[i] == b[i]);
    }
  }
}

TEST_CASE("H_c distance matches a brute-force oracle in the plane") {
  const auto x_axis = SemiLinearSubspace::span({v2(1, 0)});
  const auto y_axis = SemiLinearSubspace::span({v2(0, 1)});
  const auto ray_x = SemiLinearSubspace::ray(v2(1, 0));
  const auto quadrant = SemiLinearSubspace(2, {}, {v2(1, 0), v2(0, 1)});
  const auto upper = halfspace(x_axis, v2(0, 1));
  const std::vector<std::pair<SemiLinearSubspace, SemiLinearSubspace>> pairs{
      {x_axis, y_axis}, {ray_x, x_axis}, {quadrant, upper}, {ray_x, quadrant}, {upper, SemiLinearSubspace::whole(2)}};
  for (const auto& [a, b] : pairs) {
    const auto est = hc_distance(a, b, 720);
    CHECK(std::abs(est.value - brute_hc_2d(a, b)) < 2e-2);
    CHECK(est.value >= 0);
  }
  CHECK(hc_distance(x_axis, y_axis).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(hc_distance(ray_x, x_axis).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(hc_distance(x_axis, x_axis).value < 1e-12);
  CHECK_THROWS_AS(hc_distance(x_axis, y_axis, 10), ArgumentError);
}

TEST_CASE("H_c is a metric on samples") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  auto random_w = [&] {
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 0) return SemiLinearSubspace::span({v3(g(rng), g(rng), g(rng))});
    if (kind == 1) return SemiLinearSubspace::ray(v3(g(rng), g(rng), g(rng)));
    return halfspace(SemiLinearSubspace::span({v3(g(rng), g(rng), g(rng))}), v3(g(rng), g(rng), g(rng)));
  };
  for (int t = 0; t < 20; ++t) {
    const auto a = random_w(), b = random_w(), c = random_w();
    const auto ab = hc_distance(a, b), bc = hc_distance(b, c), ac = hc_distance(a, c);
    CHECK(std::abs(ab.value - hc_distance(b, a).value) <= ab.mesh_error + 1e-9);
    CHECK(ac.value <= ab.value + bc.value + ab.mesh_error + bc.mesh_error + ac.mesh_error + 1e-9);
    CHECK(ab.value <= 1.0 + 1e-12);
  }
}

TEST_CASE("linear maps on W extend with zero normal component") {
  const auto w = halfspace(SemiLinearSubspace::span({v3(1, 0, 0)}), v3(0, 1, 0));
  const auto gens = w.generators();
  std::vector<double> values;
  const Vec d = v3(2, -3, 0);
  for (const auto& g : gens) values.push_back(d.dot(g));
  const auto ext = extend_linear_map(make_map(w, values));
  CHECK(ext.extended);
  CHECK((ext.coefficients - d).norm() < 1e-12);
  CHECK(ext(v3(1, 1, 0)) == doctest::Approx(-1.0));

  std::vector<double> bad = values;
  bad[0] += 1.0;
  bad[1] += 1.0;
  CHECK_THROWS_AS(extend_linear_map(make_map(w, bad)), ConsistencyError);
}
