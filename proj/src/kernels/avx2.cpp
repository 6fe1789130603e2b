// Compiled with -mavx2 -mfma -ffp-contract=off on x86-64. Products and sums in
// squared_distances / max_affine are issued in the same order as the scalar
// reference, so those two kernels agree bit-for-bit with it.

#include <algorithm>
#include <cmath>
#include <limits>

#include "tangentia/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define TANGENTIA_HAVE_AVX2_BUILD 1
#else
#define TANGENTIA_HAVE_AVX2_BUILD 0
#endif

namespace tangentia::kernels::avx2 {

#if TANGENTIA_HAVE_AVX2_BUILD

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  const std::size_t n = w.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + i), _mm256_loadu_pd(v.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + i + 4), _mm256_loadu_pd(v.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + i), _mm256_loadu_pd(v.data() + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += w[i] * v[i];
  return s;
}

void squared_distances(const PointBatch& points, const Vec& q, std::span<double> out) {
  const std::size_t n = points.size();
  const int dim = points.dim;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_setzero_pd();
    for (int d = 0; d < dim; ++d) {
      const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(points.coord[d].data() + i), _mm256_set1_pd(q[d]));
      s = _mm256_add_pd(s, _mm256_mul_pd(t, t));
    }
    _mm256_storeu_pd(out.data() + i, s);
  }
  for (; i < n; ++i) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double t = points.coord[d][i] - q[d];
      s += t * t;
    }
    out[i] = s;
  }
}

void max_affine(const AffineFamily& family, const PointBatch& points, std::span<double> out) {
  const std::size_t n = points.size();
  const std::size_t terms = family.size();
  const int dim = family.dim;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x[kMaxDim];
    for (int d = 0; d < dim; ++d) x[d] = _mm256_loadu_pd(points.coord[d].data() + i);
    __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < terms; ++k) {
      __m256d v = _mm256_set1_pd(family.offset[k]);
      for (int d = 0; d < dim; ++d) v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_set1_pd(family.slope[d][k]), x[d]));
      best = _mm256_max_pd(best, v);
    }
    _mm256_storeu_pd(out.data() + i, best);
  }
  for (; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < terms; ++k) {
      double v = family.offset[k];
      for (int d = 0; d < dim; ++d) v += family.slope[d][k] * points.coord[d][i];
      best = std::max(best, v);
    }
    out[i] = best;
  }
}

double max_abs_residual(std::span<const double> e, const PointBatch& coords, std::span<const double> coef) {
  const std::size_t n = e.size();
  const int dim = coords.dim;
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d worst = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d fit = _mm256_setzero_pd();
    for (int d = 0; d < dim; ++d)
      fit = _mm256_add_pd(fit, _mm256_mul_pd(_mm256_set1_pd(coef[d]), _mm256_loadu_pd(coords.coord[d].data() + i)));
    const __m256d r = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(_mm256_loadu_pd(e.data() + i), fit));
    worst = _mm256_max_pd(worst, r);
  }
  double w = hmax(worst);
  for (; i < n; ++i) {
    double fit = 0.0;
    for (int d = 0; d < dim; ++d) fit += coef[d] * coords.coord[d][i];
    w = std::max(w, std::abs(e[i] - fit));
  }
  return w;
}

#else  // non-x86 builds: the AVX2 entry points forward to the reference kernels.

double weighted_sum(std::span<const double> w, std::span<const double> v) { return scalar::weighted_sum(w, v); }
void squared_distances(const PointBatch& p, const Vec& q, std::span<double> out) { scalar::squared_distances(p, q, out); }
void max_affine(const AffineFamily& f, const PointBatch& p, std::span<double> out) { scalar::max_affine(f, p, out); }
double max_abs_residual(std::span<const double> e, const PointBatch& c, std::span<const double> coef) {
  return scalar::max_abs_residual(e, c, coef);
}

#endif

}  // namespace tangentia::kernels::avx2
