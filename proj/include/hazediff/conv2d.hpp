// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hazediff/simd/kernels.hpp"
#include "hazediff/tensor.hpp"
#include "hazediff/threading.hpp"

namespace hazediff {

/// Depthwise 2-D convolution with replicate (edge-clamp) padding. The kernel
/// is a k x k row-major array applied independently to every channel; output
/// dimensions equal input dimensions.
///
/// The per-row update walks kernel taps and adds shifted input rows, so the
/// interior of each row is a single contiguous axpy of width*channels floats.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const std::vector<T>& kernel, int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("conv2d: kernel size must be odd");
  if (kernel.size() != static_cast<size_t>(k) * k)
    throw std::invalid_argument("conv2d: kernel data does not match size");

  const int h = x.height(), w = x.width(), c = x.channels();
  const int r = k / 2;
  Tensor<T> out(h, w, c);

  auto process_row = [&](int y) {
    T* orow = out.pixel(y, 0);
    for (int dy = -r; dy <= r; ++dy) {
      const int sy = std::clamp(y + dy, 0, h - 1);
      const T* irow = x.pixel(sy, 0);
      for (int dx = -r; dx <= r; ++dx) {
        const T wk = kernel[(dy + r) * k + (dx + r)];
        if (wk == T{}) continue;
        // interior: x + dx stays in range
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w - 1, w - 1 - dx);
        if (x1 >= x0)
          kernels::axpy(orow + static_cast<size_t>(x0) * c,
                        irow + static_cast<size_t>(x0 + dx) * c, wk,
                        static_cast<size_t>(x1 - x0 + 1) * c);
        // left edge clamps to column 0, right edge to column w-1
        for (int xx = 0; xx < x0; ++xx)
          kernels::axpy(orow + static_cast<size_t>(xx) * c, irow, wk, c);
        for (int xx = x1 + 1; xx < w; ++xx)
          kernels::axpy(orow + static_cast<size_t>(xx) * c,
                        irow + static_cast<size_t>(w - 1) * c, wk, c);
      }
    }
  };

  // Rows are independent, so chunked threads give bitwise-sequential results.
  if (static_cast<long long>(h) * w * c * k * k >= 1 << 20)
    parallel_for(h, process_row);
  else
    for (int y = 0; y < h; ++y) process_row(y);
  return out;
}

/// Adjoint of conv2d under the same replicate padding: the transpose of the
/// linear map x -> conv2d(x, kernel). Border contributions fold back into the
/// clamped edge pixels.
template <typename T>
Tensor<T> conv2d_adjoint(const Tensor<T>& g, const std::vector<T>& kernel, int k) {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("conv2d_adjoint: kernel size must be odd");
  if (kernel.size() != static_cast<size_t>(k) * k)
    throw std::invalid_argument("conv2d_adjoint: kernel data does not match size");

  const int h = g.height(), w = g.width(), c = g.channels();
  const int r = k / 2;
  Tensor<T> acc(h, w, c);

  for (int y = 0; y < h; ++y) {
    const T* grow = g.pixel(y, 0);
    for (int dy = -r; dy <= r; ++dy) {
      const int ty = std::clamp(y + dy, 0, h - 1);
      T* arow = acc.pixel(ty, 0);
      for (int dx = -r; dx <= r; ++dx) {
        const T wk = kernel[(dy + r) * k + (dx + r)];
        if (wk == T{}) continue;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w - 1, w - 1 - dx);
        if (x1 >= x0)
          kernels::axpy(arow + static_cast<size_t>(x0 + dx) * c,
                        grow + static_cast<size_t>(x0) * c, wk,
                        static_cast<size_t>(x1 - x0 + 1) * c);
        for (int xx = 0; xx < x0; ++xx)
          kernels::axpy(arow, grow + static_cast<size_t>(xx) * c, wk, c);
        for (int xx = x1 + 1; xx < w; ++xx)
          kernels::axpy(arow + static_cast<size_t>(w - 1) * c,
                        grow + static_cast<size_t>(xx) * c, wk, c);
      }
    }
  }
  return acc;
}

/// Bilinear resize; image coordinates follow the half-pixel convention.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize: bad output size");
  const int h = x.height(), w = x.width(), c = x.channels();
  Tensor<T> out(out_h, out_w, c);
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int ya = std::clamp(y0, 0, h - 1), yb = std::clamp(y0 + 1, 0, h - 1);
    for (int xo = 0; xo < out_w; ++xo) {
      double fx = (xo + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int xa = std::clamp(x0, 0, w - 1), xb = std::clamp(x0 + 1, 0, w - 1);
      for (int ch = 0; ch < c; ++ch) {
        double top = (1.0 - wx) * x.at(ya, xa, ch) + wx * x.at(ya, xb, ch);
        double bot = (1.0 - wx) * x.at(yb, xa, ch) + wx * x.at(yb, xb, ch);
        out.at(y, xo, ch) = static_cast<T>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

} // namespace hazediff
