// SPDX-License-Identifier: Apache-2.0
// NEON kernel variants for aarch64 builds. Same contract as the AVX2 file:
// elementwise ops match the scalar reference bitwise, reductions are
// tolerance-checked.

#include "tables.hpp"

#if HAZEDIFF_ARM64

#include <arm_neon.h>

namespace hazediff::kernels::detail {

namespace {

void axpy_neon(float* y, const float* x, float a, size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t vy = vld1q_f32(y + i);
    vy = vaddq_f32(vy, vmulq_f32(va, vld1q_f32(x + i)));
    vst1q_f32(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_neon(float* out, const float* x, float a, const float* y, float b, size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  const float32x4_t vb = vdupq_n_f32(b);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t vx = vmulq_f32(va, vld1q_f32(x + i));
    float32x4_t vy = vmulq_f32(vb, vld1q_f32(y + i));
    vst1q_f32(out + i, vaddq_f32(vx, vy));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

float dot_neon(const float* x, const float* y, size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(x + i), vld1q_f32(y + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(x + i + 4), vld1q_f32(y + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = vfmaq_f32(acc0, vld1q_f32(x + i), vld1q_f32(y + i));
  float res = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) res += x[i] * y[i];
  return res;
}

float sum_abs_neon(const float* x, size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vaddq_f32(acc, vabsq_f32(vld1q_f32(x + i)));
  float res = vaddvq_f32(acc);
  for (; i < n; ++i) res += x[i] < 0.0f ? -x[i] : x[i];
  return res;
}

void matvec_acc_neon(float* acc, const float* m, const float* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) acc[r] += dot_neon(m + r * cols, v, cols);
}

void fma_axpy(float* y, const float* x, float a, size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_t_acc_neon(float* acc, const float* m, const float* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) fma_axpy(acc, m + r * cols, v[r], cols);
}

void ger_acc_neon(float* m, const float* u, const float* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) fma_axpy(m + r * cols, v, u[r], cols);
}

} // namespace

void fill_neon(TableF& t) {
  t.axpy = &axpy_neon;
  t.axpby = &axpby_neon;
  t.dot = &dot_neon;
  t.sum_abs = &sum_abs_neon;
  t.matvec_acc = &matvec_acc_neon;
  t.matvec_t_acc = &matvec_t_acc_neon;
  t.ger_acc = &ger_acc_neon;
}

} // namespace hazediff::kernels::detail

#endif // HAZEDIFF_ARM64
