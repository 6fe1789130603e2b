#include <algorithm>
#include <cmath>
#include <limits>

#include "tangentia/kernels.hpp"

namespace tangentia::kernels::scalar {

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

void squared_distances(const PointBatch& points, const Vec& q, std::span<double> out) {
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int d = 0; d < points.dim; ++d) {
      const double t = points.coord[d][i] - q[d];
      s += t * t;
    }
    out[i] = s;
  }
}

void max_affine(const AffineFamily& family, const PointBatch& points, std::span<double> out) {
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < family.size(); ++k) {
      double v = family.offset[k];
      for (int d = 0; d < family.dim; ++d) v += family.slope[d][k] * points.coord[d][i];
      best = std::max(best, v);
    }
    out[i] = best;
  }
}

double max_abs_residual(std::span<const double> e, const PointBatch& coords, std::span<const double> coef) {
  double worst = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double fit = 0.0;
    for (int d = 0; d < coords.dim; ++d) fit += coef[d] * coords.coord[d][i];
    worst = std::max(worst, std::abs(e[i] - fit));
  }
  return worst;
}

}  // namespace tangentia::kernels::scalar
