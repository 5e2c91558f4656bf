// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hazediff/conv2d.hpp"
#include "hazediff/simd/kernels.hpp"
#include "hazediff/tensor.hpp"

namespace hazediff {

/// One low-pass Gaussian tap of the filter bank.
struct GaussianSpec {
  int k = 3;         // odd kernel side
  float sigma = 1.0; // std in pixels, > 0
};

/// Normalized k x k Gaussian kernel (sum 1, symmetric under flips).
template <typename T>
std::vector<T> gaussian_kernel(const GaussianSpec& spec) {
  if (spec.k < 1 || spec.k % 2 == 0)
    throw std::invalid_argument("gaussian_kernel: k must be odd and >= 1");
  if (!(spec.sigma > 0.0f)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");

  const int k = spec.k;
  const double c = (k - 1) / 2.0;
  const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
  std::vector<double> tmp(static_cast<size_t>(k) * k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double r2 = (i - c) * (i - c) + (j - c) * (j - c);
      double v = std::exp(-r2 * inv);
      tmp[static_cast<size_t>(i) * k + j] = v;
      sum += v;
    }
  std::vector<T> out(tmp.size());
  for (size_t i = 0; i < tmp.size(); ++i) out[i] = static_cast<T>(tmp[i] / sum);
  return out;
}

/// Fixed Gaussian bank with derived band-/high-pass branches and M+1
/// trainable mixing weights. Kernels are frozen after construction; only the
/// weights train. Branches are ordered by sigma ascending, so branch j is
/// the difference of blurs j-1 and j (branch 1 uses the raw signal).
template <typename T>
struct FilterBank {
  std::vector<GaussianSpec> specs;     // M entries, sigma ascending
  std::vector<std::vector<T>> kernels; // one normalized kernel per spec
  T gamma_sigma = T(1);                // cutoff scale applied as sigma' = gamma * sigma
  std::vector<T> weights;              // M+1 entries, initialized to 1

  int branch_count() const { return static_cast<int>(specs.size()) + 1; }
  int max_kernel_size() const {
    int mk = 1;
    for (const auto& s : specs) mk = std::max(mk, s.k);
    return mk;
  }
};

template <typename T>
FilterBank<T> build_filter_bank(std::vector<GaussianSpec> specs, T gamma_sigma = T(1)) {
  if (specs.empty()) throw std::invalid_argument("filter bank: need at least one kernel");
  if (!(gamma_sigma > T(0)))
    throw std::invalid_argument("filter bank: gamma_sigma must be > 0");
  std::stable_sort(specs.begin(), specs.end(), [](const GaussianSpec& a, const GaussianSpec& b) {
    return a.sigma < b.sigma || (a.sigma == b.sigma && a.k < b.k);
  });
  FilterBank<T> bank;
  bank.specs = std::move(specs);
  bank.gamma_sigma = gamma_sigma;
  for (const auto& s : bank.specs) {
    GaussianSpec scaled{s.k, s.sigma * static_cast<float>(gamma_sigma)};
    bank.kernels.push_back(gaussian_kernel<T>(scaled));
  }
  bank.weights.assign(bank.specs.size() + 1, T(1));
  return bank;
}

/// Default bank: k in {3,5,7}, sigma in {1,2,4}, M = 3.
template <typename T>
FilterBank<T> default_filter_bank(T gamma_sigma = T(1)) {
  return build_filter_bank<T>({{3, 1.0f}, {5, 2.0f}, {7, 4.0f}}, gamma_sigma);
}

/// Rebuilds all kernels with sigma' = gamma_sigma * sigma (same k values);
/// weights carry over.
template <typename T>
FilterBank<T> scale_bank(const FilterBank<T>& bank, T gamma_sigma) {
  FilterBank<T> out = build_filter_bank<T>(bank.specs, gamma_sigma);
  out.weights = bank.weights;
  return out;
}

/// Branch outputs kept for the backward pass (and for weight gradients).
template <typename T>
struct FcbCache {
  std::vector<Tensor<T>> branches; // [s, s - s1, s1 - s2, ...]
};

template <typename T>
struct FcbResult {
  Tensor<T> output;
  FcbCache<T> cache;
};

/// Forward pass: blur with each kernel, take consecutive differences to form
/// the band/high-pass branches, then mix with the trainable weights.
template <typename T>
FcbResult<T> fcb_forward(const Tensor<T>& s, const FilterBank<T>& bank) {
  const int m = static_cast<int>(bank.specs.size());
  FcbResult<T> res;
  res.cache.branches.reserve(m + 1);
  res.cache.branches.push_back(s);

  Tensor<T> prev = s;
  for (int j = 0; j < m; ++j) {
    Tensor<T> blurred = conv2d(s, bank.kernels[j], bank.specs[j].k);
    Tensor<T> diff(s.height(), s.width(), s.channels());
    kernels::axpby(diff.data(), prev.data(), T(1), blurred.data(), T(-1), s.size());
    res.cache.branches.push_back(std::move(diff));
    prev = std::move(blurred);
  }

  Tensor<T> out(s.height(), s.width(), s.channels());
  kernels::axpby(out.data(), res.cache.branches[0].data(), bank.weights[0], out.data(), T(0),
                 s.size());
  for (int j = 1; j <= m; ++j)
    kernels::axpy(out.data(), res.cache.branches[j].data(), bank.weights[j], s.size());
  res.output = std::move(out);
  return res;
}

/// Combined kernel of the whole block: the weighted sum of the identity and
/// difference branches collapsed into one max-size kernel. Valid because
/// replicate-padded convolution is linear in the kernel and indifferent to
/// zero-padding the kernel itself.
template <typename T>
std::vector<T> effective_kernel(const FilterBank<T>& bank) {
  const int m = static_cast<int>(bank.specs.size());
  const int km = bank.max_kernel_size();
  std::vector<T> k(static_cast<size_t>(km) * km, T(0));
  auto add_embedded = [&](const std::vector<T>& src, int ks, T coeff) {
    const int off = (km - ks) / 2;
    for (int i = 0; i < ks; ++i)
      for (int j = 0; j < ks; ++j)
        k[static_cast<size_t>(i + off) * km + (j + off)] +=
            coeff * src[static_cast<size_t>(i) * ks + j];
  };
  // s_bar = (w0 + w1) s + sum_{j=1}^{m-1} (w_{j+1} - w_j) G_j s - w_m G_m s
  k[static_cast<size_t>(km / 2) * km + km / 2] += bank.weights[0] + bank.weights[1];
  for (int j = 1; j < m; ++j)
    add_embedded(bank.kernels[j - 1], bank.specs[j - 1].k, bank.weights[j + 1] - bank.weights[j]);
  add_embedded(bank.kernels[m - 1], bank.specs[m - 1].k, -bank.weights[m]);
  return k;
}

template <typename T>
struct FcbGrads {
  Tensor<T> grad_input;
  std::vector<T> grad_weights;
};

/// Exact gradients of the block. grad_weights[j] is the inner product of the
/// upstream gradient with branch j; grad_input applies the adjoint of the
/// fixed linear map (replicate-padding transpose of the effective kernel).
template <typename T>
FcbGrads<T> fcb_backward(const Tensor<T>& grad_out, const FcbCache<T>& cache,
                         const FilterBank<T>& bank) {
  const int m = static_cast<int>(bank.specs.size());
  if (static_cast<int>(cache.branches.size()) != m + 1)
    throw std::invalid_argument("fcb_backward: cache does not match bank");
  if (!grad_out.same_shape(cache.branches[0]))
    throw std::invalid_argument("fcb_backward: gradient shape mismatch");

  FcbGrads<T> g;
  g.grad_weights.resize(m + 1);
  for (int j = 0; j <= m; ++j)
    g.grad_weights[j] = kernels::dot(grad_out.data(), cache.branches[j].data(), grad_out.size());
  g.grad_input = conv2d_adjoint(grad_out, effective_kernel(bank), bank.max_kernel_size());
  return g;
}

/// Per-branch frequency response curves measured with sinusoid probes.
struct FrequencyResponse {
  std::vector<double> freq;                   // [0, 0.5] cycles/pixel
  std::vector<std::vector<double>> response;  // [branch][freq]
};

/// Magnitude response of one branch at radial frequency f and orientation
/// theta, measured by driving a unit sinusoid through the branch on a
/// grid x grid plane (padding effects included). Branch 0 is the identity.
template <typename T>
double branch_response(const FilterBank<T>& bank, int branch, double f, double theta,
                       int grid = 256) {
  const int m = static_cast<int>(bank.specs.size());
  if (branch < 0 || branch > m) throw std::invalid_argument("branch_response: bad branch");
  if (branch == 0) return 1.0;

  // difference kernel G_{branch-1} - G_branch (G_0 = identity)
  const int ka = branch == 1 ? 1 : bank.specs[branch - 2].k;
  const int kb = bank.specs[branch - 1].k;
  const int ks = std::max(ka, kb);
  std::vector<T> diff(static_cast<size_t>(ks) * ks, T(0));
  auto embed = [&](const std::vector<T>& src, int n, T coeff) {
    const int off = (ks - n) / 2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        diff[static_cast<size_t>(i + off) * ks + (j + off)] +=
            coeff * src[static_cast<size_t>(i) * n + j];
  };
  if (branch == 1) diff[static_cast<size_t>(ks / 2) * ks + ks / 2] += T(1);
  else embed(bank.kernels[branch - 2], ka, T(1));
  embed(bank.kernels[branch - 1], kb, T(-1));

  Tensor<T> probe(grid, grid, 1);
  const double cx = std::cos(theta), sy = std::sin(theta);
  for (int y = 0; y < grid; ++y)
    for (int x = 0; x < grid; ++x)
      probe.at(y, x, 0) =
          static_cast<T>(std::cos(2.0 * 3.14159265358979323846 * f * (x * cx + y * sy)));

  Tensor<T> out = conv2d(probe, diff, ks);
  double ein = 0.0, eout = 0.0;
  for (size_t i = 0; i < probe.size(); ++i) {
    ein += static_cast<double>(probe.data()[i]) * probe.data()[i];
    eout += static_cast<double>(out.data()[i]) * out.data()[i];
  }
  return ein > 0.0 ? std::sqrt(eout / ein) : 0.0;
}

/// Curves over n_freq samples of [0, 0.5], averaged over probe orientations
/// 0, 45 and 90 degrees.
template <typename T>
FrequencyResponse frequency_response(const FilterBank<T>& bank, int n_freq, int grid = 256) {
  if (n_freq < 2) throw std::invalid_argument("frequency_response: need n_freq >= 2");
  const double pi = 3.14159265358979323846;
  const double thetas[3] = {0.0, pi / 4.0, pi / 2.0};

  FrequencyResponse fr;
  fr.freq.resize(n_freq);
  fr.response.assign(bank.branch_count(), std::vector<double>(n_freq, 0.0));
  for (int i = 0; i < n_freq; ++i) {
    fr.freq[i] = 0.5 * i / (n_freq - 1);
    for (int b = 0; b < bank.branch_count(); ++b) {
      double acc = 0.0;
      for (double th : thetas) acc += branch_response(bank, b, fr.freq[i], th, grid);
      fr.response[b][i] = acc / 3.0;
    }
  }
  return fr;
}

/// Frequency (in [0, 0.5]) where a measured curve peaks.
inline double peak_frequency(const std::vector<double>& freq, const std::vector<double>& resp) {
  size_t best = 0;
  for (size_t i = 1; i < resp.size(); ++i)
    if (resp[i] > resp[best]) best = i;
  return freq[best];
}

} // namespace hazediff
