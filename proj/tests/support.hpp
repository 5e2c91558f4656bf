// SPDX-License-Identifier: Apache-2.0
// Shared test helpers: procedural toy data, an O(N^2) direct DFT oracle,
// and finite-difference utilities.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hazediff/conv2d.hpp"
#include "hazediff/fft2d.hpp"
#include "hazediff/fcb.hpp"
#include "hazediff/haze_aug.hpp"
#include "hazediff/haze_synth.hpp"
#include "hazediff/rng.hpp"
#include "hazediff/tensor.hpp"

namespace testsupport {

using namespace hazediff;

/// Natural-looking test image: heavily blurred noise (falling spectrum) plus
/// a few sharp rectangles for edge content, in [0.05, 0.95].
inline ImageTensor make_texture(int h, int w, int c, SeededRng& rng) {
  ImageTensor img(h, w, c);
  for (size_t i = 0; i < img.size(); ++i)
    img.data()[i] = static_cast<float>(rng.uniform());
  img = conv2d(img, gaussian_kernel<float>({7, 2.5f}), 7);
  img = conv2d(img, gaussian_kernel<float>({7, 2.5f}), 7);

  const int rects = 3;
  for (int r = 0; r < rects; ++r) {
    const int y0 = static_cast<int>(rng.uniform_index(std::max(1, h - 4)));
    const int x0 = static_cast<int>(rng.uniform_index(std::max(1, w - 4)));
    const int ry = 2 + static_cast<int>(rng.uniform_index(std::max(1, h / 4)));
    const int rx = 2 + static_cast<int>(rng.uniform_index(std::max(1, w / 4)));
    const float v = static_cast<float>(rng.uniform());
    for (int y = y0; y < std::min(h, y0 + ry); ++y)
      for (int x = x0; x < std::min(w, x0 + rx); ++x)
        for (int ch = 0; ch < c; ++ch) img.at(y, x, ch) = v;
  }

  float lo = img.data()[0], hi = img.data()[0];
  for (size_t i = 0; i < img.size(); ++i) {
    lo = std::min(lo, img.data()[i]);
    hi = std::max(hi, img.data()[i]);
  }
  const float span = hi - lo > 1e-6f ? hi - lo : 1.0f;
  for (size_t i = 0; i < img.size(); ++i)
    img.data()[i] = 0.05f + 0.9f * (img.data()[i] - lo) / span;
  return img;
}

/// Smooth nonnegative depth: diagonal ramp plus blurred noise, max-normalized.
inline DepthMap make_depth(int h, int w, SeededRng& rng) {
  DepthMap d(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      d.at(y, x, 0) = static_cast<float>(y + x) / (h + w) +
                      0.3f * static_cast<float>(rng.uniform());
  d = conv2d(d, gaussian_kernel<float>({5, 1.5f}), 5);
  return normalize_depth(d);
}

inline std::vector<SyntheticPair> make_toy_dataset(int n, int h, int w, int channels,
                                                   uint64_t seed) {
  SeededRng rng(seed);
  std::vector<SyntheticPair> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    SyntheticPair p;
    p.clean = make_texture(h, w, channels, rng);
    p.depth = make_depth(h, w, rng);
    const float a = static_cast<float>(rng.uniform(0.7, 1.0));
    const float beta = static_cast<float>(rng.uniform(0.6, 1.8));
    p.hazy = synthesize_haze(p.clean, p.depth, AsmParams(a, beta));
    out.push_back(std::move(p));
  }
  return out;
}

/// Texture with a natural falling (1/f) amplitude spectrum and random phase,
/// plus rectangles for edge structure. Unlike make_texture it carries real
/// content at every frequency band, which the spectral experiments need.
inline ImageTensor make_natural_texture(int h, int w, int c, SeededRng& rng) {
  ImageTensor img(h, w, c);
  for (int ch = 0; ch < c; ++ch) {
    std::vector<std::complex<double>> spec(static_cast<size_t>(h) * w);
    for (int u = 0; u < h; ++u)
      for (int v = 0; v < w; ++v) {
        const double fy = (u <= h / 2 ? u : u - h) / static_cast<double>(h);
        const double fx = (v <= w / 2 ? v : v - w) / static_cast<double>(w);
        const double f = std::hypot(fy, fx);
        const double amp = f == 0.0 ? 0.0 : 1.0 / (0.02 + f);
        spec[static_cast<size_t>(u) * w + v] =
            std::polar(amp, rng.uniform(0.0, 2.0 * 3.14159265358979323846));
      }
    auto plane = fft2d_inverse(spec, h, w);
    for (int i = 0; i < h * w; ++i)
      img.data()[static_cast<size_t>(i) * c + ch] = static_cast<float>(plane[i].real());
  }
  for (int r = 0; r < 3; ++r) {
    const int y0 = static_cast<int>(rng.uniform_index(std::max(1, h - 4)));
    const int x0 = static_cast<int>(rng.uniform_index(std::max(1, w - 4)));
    const int ry = 3 + static_cast<int>(rng.uniform_index(std::max(1, h / 3)));
    const int rx = 3 + static_cast<int>(rng.uniform_index(std::max(1, w / 3)));
    const float v = static_cast<float>(rng.uniform(-0.45, 0.45));
    for (int y = y0; y < std::min(h, y0 + ry); ++y)
      for (int x = x0; x < std::min(w, x0 + rx); ++x)
        for (int ch = 0; ch < c; ++ch) img.at(y, x, ch) += v;
  }
  float lo = img.data()[0], hi = img.data()[0];
  for (size_t i = 0; i < img.size(); ++i) {
    lo = std::min(lo, img.data()[i]);
    hi = std::max(hi, img.data()[i]);
  }
  const float span = hi - lo > 1e-6f ? hi - lo : 1.0f;
  for (size_t i = 0; i < img.size(); ++i)
    img.data()[i] = 0.05f + 0.9f * (img.data()[i] - lo) / span;
  return img;
}

inline std::vector<SyntheticPair> make_natural_dataset(int n, int h, int w, int channels,
                                                       uint64_t seed) {
  SeededRng rng(seed);
  std::vector<SyntheticPair> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    SyntheticPair p;
    p.clean = make_natural_texture(h, w, channels, rng);
    p.depth = make_depth(h, w, rng);
    const float a = static_cast<float>(rng.uniform(0.7, 1.0));
    const float beta = static_cast<float>(rng.uniform(0.6, 1.8));
    p.hazy = synthesize_haze(p.clean, p.depth, AsmParams(a, beta));
    out.push_back(std::move(p));
  }
  return out;
}

/// Direct-summation 2-D DFT (unnormalized forward), the independent oracle
/// for the FFT-backed paths.
inline std::vector<std::complex<double>> dft2d_naive(const std::vector<double>& x, int h, int w) {
  const double pi = 3.14159265358979323846;
  std::vector<std::complex<double>> out(static_cast<size_t>(h) * w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
          const double phase = -2.0 * pi * (static_cast<double>(u) * y / h +
                                            static_cast<double>(v) * xx / w);
          acc += x[static_cast<size_t>(y) * w + xx] *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
      out[static_cast<size_t>(u) * w + v] = acc;
    }
  return out;
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Tensor<double> random_tensor_d(int h, int w, int c, SeededRng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  Tensor<double> t(h, w, c);
  for (size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

inline ImageTensor random_tensor_f(int h, int w, int c, SeededRng& rng, double lo = 0.0,
                                   double hi = 1.0) {
  ImageTensor t(h, w, c);
  for (size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

} // namespace testsupport
