// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "hazediff/fcb.hpp" // gaussian_kernel for the post-migration smoothing
#include "hazediff/fft2d.hpp"
#include "hazediff/haze_synth.hpp"
#include "hazediff/rng.hpp"
#include "hazediff/tensor.hpp"

namespace hazediff {

/// Augmentation parameter ranges. Defaults follow the widened hard-sample
/// ranges A in (0.5, 1.8), beta in (0.8, 2.8) and the migration window
/// delta in (0, 2.1e-3).
struct HazeAugConfig {
  float a_min = 0.5f;
  float a_max = 1.8f;
  float beta_min = 0.8f;
  float beta_max = 2.8f;
  double delta_min = 0.0;
  double delta_max = 2.1e-3;
  int smooth_k = 3;
  float smooth_sigma = 1.0f;

  void validate() const {
    if (!(0.0f < a_min && a_min < a_max))
      throw std::invalid_argument("haze aug: need 0 < a_min < a_max");
    if (!(0.0f < beta_min && beta_min < beta_max))
      throw std::invalid_argument("haze aug: need 0 < beta_min < beta_max");
    if (!(0.0 <= delta_min && delta_min < delta_max && delta_max <= 1.0))
      throw std::invalid_argument("haze aug: need 0 <= delta_min < delta_max <= 1");
    if (smooth_k < 1 || smooth_k % 2 == 0)
      throw std::invalid_argument("haze aug: smooth_k must be odd");
    if (!(smooth_sigma > 0.0f))
      throw std::invalid_argument("haze aug: smooth_sigma must be > 0");
  }
};

/// One (hazy, clean, depth) training triplet; depth is normalized to [0,1].
struct SyntheticPair {
  ImageTensor hazy;
  ImageTensor clean;
  DepthMap depth;
};

/// Centered low-frequency window: on the DC-centered spectrum grid,
/// mask(u,v) = 1 iff |u - cu| <= round(delta*h) and |v - cv| <= round(delta*w).
/// delta = 0 keeps the mask empty; for delta > 0 the half-width is at least 1
/// so the DC bin always migrates (otherwise the published delta range would
/// move nothing at small image sizes).
inline ImageTensor low_freq_mask(int h, int w, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("low_freq_mask: delta must be in [0,1]");
  ImageTensor mask(h, w, 1, 0.0f);
  if (delta == 0.0) return mask;
  const long rh = std::max(1l, std::lround(delta * h));
  const long rw = std::max(1l, std::lround(delta * w));
  const int cu = h / 2, cv = w / 2;
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v)
      if (std::labs(u - cu) <= rh && std::labs(v - cv) <= rw) mask.at(u, v, 0) = 1.0f;
  return mask;
}

/// Spectral step of haze migration, before smoothing and clamping: per
/// channel, replace the amplitude of dst_clean inside the centered window by
/// the amplitude of src, keep dst_clean's phase everywhere, and invert.
inline ImageTensor haze_migration_preblur(const ImageTensor& src, const ImageTensor& dst_clean,
                                          double delta) {
  if (!src.same_shape(dst_clean))
    throw std::invalid_argument("haze_migration: dimension mismatch");
  const int h = src.height(), w = src.width(), c = src.channels();
  const ImageTensor mask = low_freq_mask(h, w, delta);

  ImageTensor out(h, w, c);
  std::vector<double> plane(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) plane[static_cast<size_t>(y) * w + x] = src.at(y, x, ch);
    auto fsrc = fftshift(fft2d_forward(plane, h, w), h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) plane[static_cast<size_t>(y) * w + x] = dst_clean.at(y, x, ch);
    auto fdst = fftshift(fft2d_forward(plane, h, w), h, w);

    std::vector<std::complex<double>> mixed(fdst.size());
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        const double m = mask.at(y, x, 0);
        const double amp = m * std::abs(fsrc[i]) + (1.0 - m) * std::abs(fdst[i]);
        mixed[i] = std::polar(amp, std::arg(fdst[i]));
      }
    auto back = fft2d_inverse(fftshift_back(mixed, h, w), h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(y, x, ch) = static_cast<float>(back[static_cast<size_t>(y) * w + x].real());
  }
  return out;
}

/// Full haze migration: spectral swap, then Gaussian smoothing to soften the
/// hard window threshold, then clamp to [0,1].
inline ImageTensor haze_migration(const ImageTensor& src, const ImageTensor& dst_clean,
                                  double delta, const HazeAugConfig& cfg) {
  ImageTensor out = haze_migration_preblur(src, dst_clean, delta);
  out = conv2d(out, gaussian_kernel<float>({cfg.smooth_k, cfg.smooth_sigma}), cfg.smooth_k);
  for (size_t i = 0; i < out.size(); ++i) {
    float v = out.data()[i];
    out.data()[i] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  }
  return out;
}

/// Severe-haze synthesis with A ~ U(a_min, a_max), beta ~ U(beta_min,
/// beta_max). Depth must already be normalized.
inline ImageTensor hard_sample(const ImageTensor& clean, const DepthMap& depth, SeededRng& rng,
                               const HazeAugConfig& cfg) {
  const float a = static_cast<float>(rng.uniform(cfg.a_min, cfg.a_max));
  const float beta = static_cast<float>(rng.uniform(cfg.beta_min, cfg.beta_max));
  return synthesize_haze(clean, depth, AsmParams(a, beta));
}

/// What an augmentation draw did, sufficient to replay it exactly.
struct AugRecord {
  enum class Branch { hard, migrate };
  Branch branch = Branch::hard;
  float atmospheric_light = 0.0f; // hard branch
  float beta = 0.0f;              // hard branch
  double delta = 0.0;             // migrate branch
  size_t donor = 0;               // migrate branch
};

/// Coin-flip augmentation of sample `index`: below 0.5 make a hard sample
/// from its own clean/depth, otherwise migrate the low-frequency band of a
/// uniformly drawn donor's hazy image onto this clean image (the donor may
/// be the sample itself).
inline ImageTensor haze_aug(size_t index, std::span<const SyntheticPair> dataset, SeededRng& rng,
                            const HazeAugConfig& cfg, AugRecord* record = nullptr) {
  if (dataset.empty()) throw std::invalid_argument("haze_aug: empty dataset");
  if (index >= dataset.size()) throw std::invalid_argument("haze_aug: index out of range");

  const double coin = rng.uniform();
  if (coin < 0.5) {
    const float a = static_cast<float>(rng.uniform(cfg.a_min, cfg.a_max));
    const float beta = static_cast<float>(rng.uniform(cfg.beta_min, cfg.beta_max));
    if (record) *record = {AugRecord::Branch::hard, a, beta, 0.0, 0};
    return synthesize_haze(dataset[index].clean, dataset[index].depth, AsmParams(a, beta));
  }
  const double delta = rng.uniform(cfg.delta_min, cfg.delta_max);
  const size_t donor = rng.uniform_index(dataset.size());
  if (record) *record = {AugRecord::Branch::migrate, 0.0f, 0.0f, delta, donor};
  return haze_migration(dataset[donor].hazy, dataset[index].clean, delta, cfg);
}

/// Re-applies a recorded augmentation without consuming randomness.
inline ImageTensor replay_aug(size_t index, std::span<const SyntheticPair> dataset,
                              const AugRecord& record, const HazeAugConfig& cfg) {
  if (index >= dataset.size()) throw std::invalid_argument("replay_aug: index out of range");
  if (record.branch == AugRecord::Branch::hard)
    return synthesize_haze(dataset[index].clean, dataset[index].depth,
                           AsmParams(record.atmospheric_light, record.beta));
  if (record.donor >= dataset.size()) throw std::invalid_argument("replay_aug: bad donor index");
  return haze_migration(dataset[record.donor].hazy, dataset[index].clean, record.delta, cfg);
}

} // namespace hazediff
