#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference version and
// an AVX2 version; the unqualified entry points dispatch at runtime.
//
// Selection: AVX2 when the CPU reports avx2+fma, unless TANGENTIA_SIMD=scalar.

#include <cstddef>
#include <span>
#include <string_view>

#include "tangentia/types.hpp"

namespace tangentia::kernels {

enum class Isa { Scalar, Avx2 };

/// ISA chosen for this process (decided once).
Isa active_isa();
std::string_view isa_name(Isa isa);
bool cpu_has_avx2();

/// Affine family a_k . x + c_k stored structure-of-arrays: slope[d][k], offset[k].
struct AffineFamily {
  int dim = 0;
  std::array<std::vector<double>, kMaxDim> slope;
  std::vector<double> offset;

  std::size_t size() const { return offset.size(); }
};

double weighted_sum(std::span<const double> w, std::span<const double> v);

/// out[i] = |p_i - q|^2.
void squared_distances(const PointBatch& points, const Vec& q, std::span<double> out);

/// out[i] = max_k (a_k . p_i + c_k). Family must be nonempty.
void max_affine(const AffineFamily& family, const PointBatch& points, std::span<double> out);

/// max_i |e_i - coef . c_i| where c_i are the columns of `coords`.
double max_abs_residual(std::span<const double> e, const PointBatch& coords, std::span<const double> coef);

namespace scalar {
double weighted_sum(std::span<const double> w, std::span<const double> v);
void squared_distances(const PointBatch& points, const Vec& q, std::span<double> out);
void max_affine(const AffineFamily& family, const PointBatch& points, std::span<double> out);
double max_abs_residual(std::span<const double> e, const PointBatch& coords, std::span<const double> coef);
}  // namespace scalar

// Only callable when cpu_has_avx2().
namespace avx2 {
double weighted_sum(std::span<const double> w, std::span<const double> v);
void squared_distances(const PointBatch& points, const Vec& q, std::span<double> out);
void max_affine(const AffineFamily& family, const PointBatch& points, std::span<double> out);
double max_abs_residual(std::span<const double> e, const PointBatch& coords, std::span<const double> coef);
}  // namespace avx2

}  // namespace tangentia::kernels
