#include <cstdlib>
#include <random>

#include "doctest.h"
#include "tangentia/kernels.hpp"

using namespace tangentia;

namespace {

PointBatch random_batch(int dim, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  PointBatch b(dim, count);
  for (int d = 0; d < dim; ++d)
    for (auto& v : b.coord[d]) v = u(rng);
  return b;
}

}  // namespace

TEST_CASE("scalar kernels match hand-computed values") {
  std::vector<double> w{0.5, 0.25, 0.25}, v{2.0, 4.0, -8.0};
  CHECK(kernels::scalar::weighted_sum(w, v) == doctest::Approx(0.0));

  PointBatch p(2, 2);
  p.set(0, Vec{{1.0, 2.0}});
  p.set(1, Vec{{-1.0, 0.0}});
  std::vector<double> out(2);
  kernels::scalar::squared_distances(p, Vec{{1.0, 0.0}}, out);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 4.0);

  kernels::AffineFamily fam;
  fam.dim = 2;
  fam.slope[0] = {1.0, -1.0};
  fam.slope[1] = {0.0, 0.0};
  fam.offset = {0.0, 0.5};
  kernels::scalar::max_affine(fam, p, out);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 1.5);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  if (!kernels::cpu_has_avx2()) return;
  std::mt19937_64 rng(7);
  for (int dim = 1; dim <= 3; ++dim) {
    for (std::size_t count : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 1027u}) {
      auto p = random_batch(dim, count, rng);
      Vec q = Vec::Random(dim);
      std::vector<double> a(count), b(count);
      kernels::scalar::squared_distances(p, q, a);
      kernels::avx2::squared_distances(p, q, b);
      CHECK(a == b);

      kernels::AffineFamily fam;
      fam.dim = dim;
      std::uniform_real_distribution<double> u(-2, 2);
      for (int k = 0; k < 5; ++k) {
        for (int d = 0; d < dim; ++d) fam.slope[d].push_back(u(rng));
        fam.offset.push_back(u(rng));
      }
      kernels::scalar::max_affine(fam, p, a);
      kernels::avx2::max_affine(fam, p, b);
      CHECK(a == b);

      std::vector<double> w(count);
      for (auto& x : w) x = u(rng);
      const double s1 = kernels::scalar::weighted_sum(w, p.coord[0]);
      const double s2 = kernels::avx2::weighted_sum(w, p.coord[0]);
      CHECK(std::abs(s1 - s2) <= 1e-12 * (1.0 + std::abs(s1)) * static_cast<double>(count + 1));

      std::vector<double> coef(dim);
      for (auto& c : coef) c = u(rng);
      std::vector<double> e(count);
      for (auto& x : e) x = u(rng);
      const double r1 = kernels::scalar::max_abs_residual(e, p, coef);
      const double r2 = kernels::avx2::max_abs_residual(e, p, coef);
      CHECK(std::abs(r1 - r2) <= 1e-12 * (1.0 + r1));
    }
  }
}

TEST_CASE("dispatch reports a consistent ISA") {
  const auto isa = kernels::active_isa();
  const char* env = std::getenv("TANGENTIA_SIMD");
  if (env && std::string(env) == "scalar") CHECK(isa == kernels::Isa::Scalar);
  if (!kernels::cpu_has_avx2()) CHECK(isa == kernels::Isa::Scalar);
  CHECK(!kernels::isa_name(isa).empty());
}
