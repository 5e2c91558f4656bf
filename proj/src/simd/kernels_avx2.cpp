// SPDX-License-Identifier: Apache-2.0
// AVX2 kernel variants. This translation unit is compiled with
// -mavx2 -mfma -ffp-contract=off and must only be entered after a runtime
// cpuid check (simd::isa_supported).
//
// Elementwise kernels (axpy, axpby) use separate mul/add so they are
// bitwise identical to the scalar reference. Reduction and accumulation
// kernels use FMA and lane-split accumulators, which reorders the sums;
// the equivalence tests bound that difference instead.

#include "tables.hpp"

#if HAZEDIFF_X86

#include <immintrin.h>

namespace hazediff::kernels::detail {

namespace {

void axpy_avx2(float* y, const float* x, float a, size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_loadu_ps(y + i);
    __m256 vx = _mm256_loadu_ps(x + i);
    vy = _mm256_add_ps(vy, _mm256_mul_ps(va, vx));
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(float* out, const float* x, float a, const float* y, float b, size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  const __m256 vb = _mm256_set1_ps(b);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vx = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    __m256 vy = _mm256_mul_ps(vb, _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(out + i, _mm256_add_ps(vx, vy));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

float dot_avx2(const float* x, const float* y, size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  float res = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) res += x[i] * y[i];
  return res;
}

float sum_abs_avx2(const float* x, size_t n) {
  const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_add_ps(acc, _mm256_and_ps(mask, _mm256_loadu_ps(x + i)));
  float res = hsum(acc);
  for (; i < n; ++i) res += x[i] < 0.0f ? -x[i] : x[i];
  return res;
}

void matvec_acc_avx2(float* acc, const float* m, const float* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) acc[r] += dot_avx2(m + r * cols, v, cols);
}

void fma_axpy(float* y, const float* x, float a, size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_t_acc_avx2(float* acc, const float* m, const float* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) fma_axpy(acc, m + r * cols, v[r], cols);
}

void ger_acc_avx2(float* m, const float* u, const float* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) fma_axpy(m + r * cols, v, u[r], cols);
}

} // namespace

void fill_avx2(TableF& t) {
  t.axpy = &axpy_avx2;
  t.axpby = &axpby_avx2;
  t.dot = &dot_avx2;
  t.sum_abs = &sum_abs_avx2;
  t.matvec_acc = &matvec_acc_avx2;
  t.matvec_t_acc = &matvec_t_acc_avx2;
  t.ger_acc = &ger_acc_avx2;
}

} // namespace hazediff::kernels::detail

#endif // HAZEDIFF_X86
