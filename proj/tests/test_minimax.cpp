#include <cmath>
#include <random>

#include "doctest.h"
#include "tangentia/errors.hpp"
#include "tangentia/minimax.hpp"

using namespace tangentia;
using namespace tangentia::nonsmooth;

namespace {

double residual(const PointBatch& c, const std::vector<double>& e, const std::vector<double>& l) {
  double worst = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double fit = 0;
    for (int d = 0; d < c.dim; ++d) fit += l[d] * c.coord[d][i];
    worst = std::max(worst, std::abs(e[i] - fit));
  }
  return worst;
}

}  // namespace

TEST_CASE("|x| on R: best slope 0 and residual 1") {
  PointBatch c(1, 2);
  c.coord[0] = {1.0, -1.0};
  const std::vector<double> e{1.0, 1.0};
  const auto fit = chebyshev_fit(c, e);
  CHECK(fit.residual == doctest::Approx(1.0));
  CHECK(std::abs(fit.coefficients[0]) < 1e-12);
}

TEST_CASE("exact linear data gives zero residual") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int m = 1; m <= 3; ++m) {
    PointBatch c(m, 30);
    std::vector<double> e(30);
    std::vector<double> l(m);
    for (auto& v : l) v = g(rng);
    for (std::size_t i = 0; i < 30; ++i) {
      e[i] = 0;
      for (int d = 0; d < m; ++d) e[i] += l[d] * (c.coord[d][i] = g(rng));
    }
    const auto fit = chebyshev_fit(c, e);
    CHECK(fit.residual < 1e-10);
    for (int d = 0; d < m; ++d) CHECK(std::abs(fit.coefficients[d] - l[d]) < 1e-8);
  }
}

TEST_CASE("random 1D and 2D fits match a brute-force coefficient grid") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 1 + trial % 2;
    PointBatch c(m, 24);
    std::vector<double> e(24);
    for (std::size_t i = 0; i < 24; ++i) {
      for (int d = 0; d < m; ++d) c.coord[d][i] = u(rng);
      e[i] = u(rng);
    }
    const auto fit = chebyshev_fit(c, e);
    CHECK(std::abs(fit.residual - residual(c, e, fit.coefficients)) < 1e-12);
    double best = 1e300;
    const int steps = m == 1 ? 20000 : 400;
    const double span = 6.0;
    if (m == 1) {
      for (int i = 0; i <= steps; ++i) best = std::min(best, residual(c, e, {-span + 2 * span * i / steps}));
    } else {
      for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j)
          best = std::min(best, residual(c, e, {-span + 2 * span * i / steps, -span + 2 * span * j / steps}));
    }
    CHECK(fit.residual <= best + 1e-12);
    CHECK(best - fit.residual < (m == 1 ? 2e-3 : 0.1));
  }
}

TEST_CASE("input validation") {
  PointBatch c(1, 2);
  const std::vector<double> e{1.0};
  CHECK_THROWS_AS(chebyshev_fit(c, e), ArgumentError);
}
