// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "hazediff/simd/dispatch.hpp"

namespace hazediff::kernels {

/// Scalar reference kernels. These define the semantics; SIMD variants must
/// agree with them (bitwise for the elementwise ops, within accumulation
/// tolerance for the reductions).
namespace ref {

template <typename T>
inline void axpy(T* y, const T* x, T a, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
inline void axpby(T* out, const T* x, T a, const T* y, T b, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

template <typename T>
inline T dot(const T* x, const T* y, size_t n) {
  T acc{};
  for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
inline T sum_abs(const T* x, size_t n) {
  T acc{};
  for (size_t i = 0; i < n; ++i) acc += x[i] < T{} ? -x[i] : x[i];
  return acc;
}

// acc[r] += sum_c m[r * cols + c] * v[c]
template <typename T>
inline void matvec_acc(T* acc, const T* m, const T* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) acc[r] += dot(m + r * cols, v, cols);
}

// acc[c] += sum_r v[r] * m[r * cols + c]
template <typename T>
inline void matvec_t_acc(T* acc, const T* m, const T* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) axpy(acc, m + r * cols, v[r], cols);
}

// m[r * cols + c] += u[r] * v[c]
template <typename T>
inline void ger_acc(T* m, const T* u, const T* v, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) axpy(m + r * cols, v, u[r], cols);
}

} // namespace ref

/// Dispatch table for the float32 production kernels.
struct TableF {
  void (*axpy)(float*, const float*, float, size_t) = nullptr;
  void (*axpby)(float*, const float*, float, const float*, float, size_t) = nullptr;
  float (*dot)(const float*, const float*, size_t) = nullptr;
  float (*sum_abs)(const float*, size_t) = nullptr;
  void (*matvec_acc)(float*, const float*, const float*, size_t, size_t) = nullptr;
  void (*matvec_t_acc)(float*, const float*, const float*, size_t, size_t) = nullptr;
  void (*ger_acc)(float*, const float*, const float*, size_t, size_t) = nullptr;
};

/// Table for a specific instruction set (throws if unsupported). The active
/// table tracks simd::active_isa()/force_isa().
const TableF& table_for(simd::Isa isa);
const TableF& active_table();

// --- float entry points: dispatched ---------------------------------------

inline void axpy(float* y, const float* x, float a, size_t n) {
  active_table().axpy(y, x, a, n);
}
inline void axpby(float* out, const float* x, float a, const float* y, float b, size_t n) {
  active_table().axpby(out, x, a, y, b, n);
}
inline float dot(const float* x, const float* y, size_t n) {
  return active_table().dot(x, y, n);
}
inline float sum_abs(const float* x, size_t n) { return active_table().sum_abs(x, n); }
inline void matvec_acc(float* acc, const float* m, const float* v, size_t rows, size_t cols) {
  active_table().matvec_acc(acc, m, v, rows, cols);
}
inline void matvec_t_acc(float* acc, const float* m, const float* v, size_t rows, size_t cols) {
  active_table().matvec_t_acc(acc, m, v, rows, cols);
}
inline void ger_acc(float* m, const float* u, const float* v, size_t rows, size_t cols) {
  active_table().ger_acc(m, u, v, rows, cols);
}

// --- double entry points: scalar reference (used by the test-precision
// instantiations; not a production hot path) -------------------------------

inline void axpy(double* y, const double* x, double a, size_t n) { ref::axpy(y, x, a, n); }
inline void axpby(double* out, const double* x, double a, const double* y, double b, size_t n) {
  ref::axpby(out, x, a, y, b, n);
}
inline double dot(const double* x, const double* y, size_t n) { return ref::dot(x, y, n); }
inline double sum_abs(const double* x, size_t n) { return ref::sum_abs(x, n); }
inline void matvec_acc(double* acc, const double* m, const double* v, size_t rows, size_t cols) {
  ref::matvec_acc(acc, m, v, rows, cols);
}
inline void matvec_t_acc(double* acc, const double* m, const double* v, size_t rows, size_t cols) {
  ref::matvec_t_acc(acc, m, v, rows, cols);
}
inline void ger_acc(double* m, const double* u, const double* v, size_t rows, size_t cols) {
  ref::ger_acc(m, u, v, rows, cols);
}

} // namespace hazediff::kernels
