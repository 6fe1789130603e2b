#pragma once

// Ready-made functions with exact derivative oracles and Lipschitz bounds.

#include <vector>

#include "tangentia/funcspace.hpp"
#include "tangentia/kernels.hpp"

namespace tangentia::functions {

using funcspace::DirectionalFunction;

/// max(0, 1 - |y|) on R.
DirectionalFunction tent();
/// |x_axis| on R^n.
DirectionalFunction abs_coordinate(int n, int axis = 0);
/// Euclidean norm |x| on R^n.
DirectionalFunction norm(int n);
/// exp(-|x|^2 / (2 s^2)).
DirectionalFunction gaussian(int n, double s);
/// c (constant).
DirectionalFunction constant(int n, double c);
/// a . x + c.
DirectionalFunction linear(const Vec& a, double c = 0.0);
/// x^T A x / 2 + b . x + c with symmetric A.
DirectionalFunction quadratic(const Eigen::MatrixXd& a, const Vec& b, double c = 0.0);
/// max_k (a_k . x + c_k), evaluated in batches by the SIMD kernel.
DirectionalFunction max_affine(const kernels::AffineFamily& family);
/// sqrt(|y|) on R: continuous, not Lipschitz at 0.
DirectionalFunction sqrt_abs();

/// Builds an AffineFamily from rows (a_k, c_k).
kernels::AffineFamily make_affine_family(const std::vector<Vec>& slopes, const std::vector<double>& offsets);
/// max_k |a_k|.
double affine_lipschitz(const kernels::AffineFamily& family);

}  // namespace tangentia::functions
