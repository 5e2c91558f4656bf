// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "hazediff/tensor.hpp"

namespace hazediff {

/// Atmospheric scattering parameters: global atmospheric light A and the
/// scattering coefficient beta (haze density per unit depth).
struct AsmParams {
  float atmospheric_light = 1.0f; // A > 0; may exceed 1 for hard samples
  float beta = 1.0f;              // >= 0; 0 means no haze

  AsmParams() = default;
  AsmParams(float a, float b) : atmospheric_light(a), beta(b) {
    if (!(a > 0.0f)) throw std::invalid_argument("AsmParams: A must be > 0");
    if (!(b >= 0.0f)) throw std::invalid_argument("AsmParams: beta must be >= 0");
  }
};

/// Rescales a depth map to [0,1] by its maximum so beta ranges are
/// comparable across depth sources. All-zero maps are rejected.
inline DepthMap normalize_depth(const DepthMap& d) {
  float mx = 0.0f;
  for (size_t i = 0; i < d.size(); ++i) mx = std::max(mx, d.data()[i]);
  if (!(mx > 0.0f)) throw std::invalid_argument("normalize_depth: all-zero depth map");
  DepthMap out(d.height(), d.width(), 1);
  for (size_t i = 0; i < d.size(); ++i) out.data()[i] = d.data()[i] / mx;
  return out;
}

/// Per-pixel transmission t = exp(-beta * d). Expects d normalized to [0,1].
inline ImageTensor transmission(const DepthMap& d, float beta) {
  if (!(beta >= 0.0f)) throw std::invalid_argument("transmission: beta must be >= 0");
  ImageTensor t(d.height(), d.width(), 1);
  for (size_t i = 0; i < d.size(); ++i) t.data()[i] = std::exp(-beta * d.data()[i]);
  return t;
}

/// Scattering-model haze synthesis: I = J * t + A * (1 - t) per channel.
/// The output is intentionally not clamped; A above 1 over-ranges on purpose
/// and clamping is deferred to save_image.
inline ImageTensor synthesize_haze(const ImageTensor& clean, const DepthMap& depth,
                                   const AsmParams& p) {
  if (clean.channels() != 1 && clean.channels() != 3)
    throw std::invalid_argument("synthesize_haze: channels must be 1 or 3");
  if (clean.height() != depth.height() || clean.width() != depth.width())
    throw std::invalid_argument("synthesize_haze: image/depth dimension mismatch");

  if (p.beta == 0.0f) return clean; // t == 1 everywhere

  ImageTensor t = transmission(depth, p.beta);
  ImageTensor out(clean.height(), clean.width(), clean.channels());
  const float a = p.atmospheric_light;
  for (int y = 0; y < clean.height(); ++y)
    for (int x = 0; x < clean.width(); ++x) {
      const float tv = t.at(y, x, 0);
      const float* j = clean.pixel(y, x);
      float* o = out.pixel(y, x);
      for (int c = 0; c < clean.channels(); ++c) o[c] = j[c] * tv + a * (1.0f - tv);
    }
  return out;
}

} // namespace hazediff
