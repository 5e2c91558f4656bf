// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hazediff/fft2d.hpp"
#include "hazediff/tensor.hpp"

namespace hazediff {

/// Radially averaged power spectral density: power per annulus of normalized
/// spatial frequency, bin centers in [0, 0.5] cycles/pixel, bin 0 = DC.
struct RadialPSD {
  std::vector<double> freq;
  std::vector<double> power;

  int bins() const { return static_cast<int>(power.size()); }
};

/// Centered 2-D power spectrum |F(x)|^2 / (H*W) of a single-channel image.
/// DC sits at (h/2, w/2). Accumulation is 64-bit.
inline std::vector<double> power_spectrum_2d(const ImageTensor& x) {
  if (x.channels() != 1)
    throw std::invalid_argument("power_spectrum_2d: single-channel input required");
  const int h = x.height(), w = x.width();
  std::vector<double> plane(x.size());
  for (size_t i = 0; i < plane.size(); ++i) plane[i] = x.data()[i];
  auto spec = fftshift(fft2d_forward(plane, h, w), h, w);
  std::vector<double> power(spec.size());
  const double norm = 1.0 / (static_cast<double>(h) * w);
  for (size_t i = 0; i < spec.size(); ++i) power[i] = std::norm(spec[i]) * norm;
  return power;
}

/// Radial average of the centered power spectrum over equal-width annuli in
/// normalized frequency. Multi-channel inputs average their per-channel
/// spectra first. Frequencies beyond Nyquist (the spectrum corners) are
/// dropped.
inline RadialPSD radial_psd(const ImageTensor& x, int bins) {
  const int h = x.height(), w = x.width();
  const int max_bins = std::min(h, w) / 2;
  if (bins < 2) throw std::invalid_argument("radial_psd: bins must be >= 2");
  if (bins > max_bins)
    throw std::invalid_argument("radial_psd: bins exceed floor(min(H,W)/2)");

  std::vector<double> power(static_cast<size_t>(h) * w, 0.0);
  for (int c = 0; c < x.channels(); ++c) {
    auto p = power_spectrum_2d(x.channels() == 1 ? x : x.channel(c));
    for (size_t i = 0; i < power.size(); ++i) power[i] += p[i];
  }
  const double cscale = 1.0 / x.channels();

  RadialPSD out;
  out.freq.resize(bins);
  out.power.assign(bins, 0.0);
  std::vector<long long> counts(bins, 0);
  const double df = 0.5 / (bins - 1);
  for (int k = 0; k < bins; ++k) out.freq[k] = k * df;

  const int cy = h / 2, cx = w / 2;
  for (int y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y - cy) / h;
    for (int xx = 0; xx < w; ++xx) {
      const double fx = static_cast<double>(xx - cx) / w;
      const double f = std::hypot(fy, fx);
      int k;
      if (y == cy && xx == cx) k = 0; // the DC bin is its own annulus
      else {
        k = static_cast<int>(std::lround(f / df));
        if (k < 1) k = 1;
        if (k >= bins) continue;
      }
      out.power[k] += power[static_cast<size_t>(y) * w + xx] * cscale;
      counts[k] += 1;
    }
  }
  for (int k = 0; k < bins; ++k)
    if (counts[k] > 0) out.power[k] /= static_cast<double>(counts[k]);
  return out;
}

/// KL distance between two PSD curves. Both are normalized to sum 1 over the
/// non-DC bins (image means would otherwise dominate), then smoothed with
/// eps = 1e-12 inside the log.
inline double psd_kl(const RadialPSD& p, const RadialPSD& q) {
  if (p.bins() != q.bins()) throw std::invalid_argument("psd_kl: bin count mismatch");
  const int n = p.bins();
  double sp = 0.0, sq = 0.0;
  for (int i = 1; i < n; ++i) {
    sp += p.power[i];
    sq += q.power[i];
  }
  if (sp <= 0.0 || sq <= 0.0) throw std::invalid_argument("psd_kl: degenerate curve");
  constexpr double eps = 1e-12;
  double kl = 0.0;
  for (int i = 1; i < n; ++i) {
    const double pi = p.power[i] / sp;
    const double qi = q.power[i] / sq;
    if (pi > 0.0) kl += pi * std::log((pi + eps) / (qi + eps));
  }
  return kl;
}

/// Uniform reference curve (1/bins per bin) on the standard frequency grid.
inline RadialPSD flat_reference(int bins) {
  if (bins < 2) throw std::invalid_argument("flat_reference: bins must be >= 2");
  RadialPSD out;
  out.freq.resize(bins);
  out.power.assign(bins, 1.0 / bins);
  const double df = 0.5 / (bins - 1);
  for (int k = 0; k < bins; ++k) out.freq[k] = k * df;
  return out;
}

} // namespace hazediff
