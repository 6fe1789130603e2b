#include <cstdlib>
#include <string>

#include "tangentia/kernels.hpp"

namespace tangentia::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return has;
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    if (const char* env = std::getenv("TANGENTIA_SIMD"); env && std::string(env) == "scalar") return Isa::Scalar;
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  return active_isa() == Isa::Avx2 ? avx2::weighted_sum(w, v) : scalar::weighted_sum(w, v);
}

void squared_distances(const PointBatch& points, const Vec& q, std::span<double> out) {
  if (active_isa() == Isa::Avx2)
    avx2::squared_distances(points, q, out);
  else
    scalar::squared_distances(points, q, out);
}

void max_affine(const AffineFamily& family, const PointBatch& points, std::span<double> out) {
  if (active_isa() == Isa::Avx2)
    avx2::max_affine(family, points, out);
  else
    scalar::max_affine(family, points, out);
}

double max_abs_residual(std::span<const double> e, const PointBatch& coords, std::span<const double> coef) {
  return active_isa() == Isa::Avx2 ? avx2::max_abs_residual(e, coords, coef) : scalar::max_abs_residual(e, coords, coef);
}

}  // namespace tangentia::kernels
