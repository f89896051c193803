#include <immintrin.h>

#include "levybsde/kernels.hpp"

namespace levybsde::kernels {

namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double sum_shifted(const double* x, std::size_t n, double shift) {
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_sub_pd(_mm256_loadu_pd(x + k), vs));
    acc1 = _mm256_add_pd(acc1, _mm256_sub_pd(_mm256_loadu_pd(x + k + 4), vs));
  }
  for (; k + 4 <= n; k += 4) acc0 = _mm256_add_pd(acc0, _mm256_sub_pd(_mm256_loadu_pd(x + k), vs));
  double s = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += x[k] - shift;
  return s;
}

double dot_shifted(const double* a, const double* r, std::size_t n, double shift) {
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d r0 = _mm256_sub_pd(_mm256_loadu_pd(r + k), vs);
    const __m256d r1 = _mm256_sub_pd(_mm256_loadu_pd(r + k + 4), vs);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + k), r0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + k + 4), r1));
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d r0 = _mm256_sub_pd(_mm256_loadu_pd(r + k), vs);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + k), r0));
  }
  double s = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += a[k] * (r[k] - shift);
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + k));
    _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), prod));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void affine(const double* x, double scale, double offset, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vo = _mm256_set1_pd(offset);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(x + k), vs), vo));
  for (; k < n; ++k) out[k] = x[k] * scale + offset;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
  for (; k < n; ++k) out[k] = a[k] * b[k];
}

void penalty_step(const double* yhat, const double* s, double n_dt, double* y, double* dk,
                  std::size_t n) {
  const double denom = 1.0 + n_dt;
  const __m256d vn = _mm256_set1_pd(n_dt);
  const __m256d vd = _mm256_set1_pd(denom);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vh = _mm256_loadu_pd(yhat + k);
    const __m256d vs = _mm256_loadu_pd(s + k);
    const __m256d keep = _mm256_cmp_pd(vh, vs, _CMP_GE_OQ);
    const __m256d pen = _mm256_div_pd(_mm256_add_pd(vh, _mm256_mul_pd(vn, vs)), vd);
    const __m256d v = _mm256_blendv_pd(pen, vh, keep);
    const __m256d gap = _mm256_sub_pd(vs, v);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(gap, zero, _CMP_GT_OQ), gap);
    _mm256_storeu_pd(y + k, v);
    _mm256_storeu_pd(dk + k, _mm256_mul_pd(vn, pos));
  }
  for (; k < n; ++k) {
    const double v = yhat[k] >= s[k] ? yhat[k] : (yhat[k] + n_dt * s[k]) / denom;
    const double gap = s[k] - v;
    y[k] = v;
    dk[k] = n_dt * (gap > 0.0 ? gap : 0.0);
  }
}

void direct_step(const double* yhat, const double* s, double* y, double* dk, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vh = _mm256_loadu_pd(yhat + k);
    const __m256d vs = _mm256_loadu_pd(s + k);
    const __m256d push = _mm256_cmp_pd(vh, vs, _CMP_LT_OQ);
    _mm256_storeu_pd(y + k, _mm256_blendv_pd(vh, vs, push));
    _mm256_storeu_pd(dk + k, _mm256_and_pd(push, _mm256_sub_pd(vs, vh)));
  }
  for (; k < n; ++k) {
    const bool push = yhat[k] < s[k];
    y[k] = push ? s[k] : yhat[k];
    dk[k] = push ? s[k] - yhat[k] : 0.0;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{sum_shifted, dot_shifted, axpy,       affine,
                                 multiply,    penalty_step, direct_step};
  return table;
}

}  // namespace levybsde::kernels
