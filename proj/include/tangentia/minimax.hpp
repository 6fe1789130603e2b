#pragma once

#include <span>
#include <vector>

#include "tangentia/types.hpp"

namespace tangentia::nonsmooth {

struct ChebyshevFit {
  std::vector<double> coefficients;  ///< length = coords.dim
  double residual = 0.0;             ///< max_i |values_i - coefficients . c_i|
  int pivots = 0;
};

/// Uniform-norm linear fit: minimise over l in R^m the quantity
/// max_i |values_i - l . c_i|, c_i being the columns of `coords` (m = coords.dim, 1..3).
///
/// Solved exactly as a linear program. The dual
///   max sum_i values_i (u_i - v_i)  s.t.  sum_i (u_i - v_i) c_i = 0,  sum_i (u_i + v_i) = 1,  u, v >= 0
/// has only m + 1 rows, so a dense two-phase simplex is cheap; the primal
/// (l, t) is read off the simplex multipliers of the optimal basis.
ChebyshevFit chebyshev_fit(const PointBatch& coords, std::span<const double> values);

}  // namespace tangentia::nonsmooth
