// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hazediff/diffusion.hpp"
#include "hazediff/errors.hpp"
#include "hazediff/fcb.hpp"
#include "hazediff/haze_aug.hpp"
#include "hazediff/rng.hpp"
#include "hazediff/simd/kernels.hpp"
#include "hazediff/tensor.hpp"

namespace hazediff {

/// 3x3 convolution layer, zero padding 1, stride 1 or 2. Weights are stored
/// tap-major ((dy*3+dx)*out_ch + oc)*in_ch + ic so each tap is a contiguous
/// out_ch x in_ch block for the matvec/ger kernels.
template <typename T>
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  int stride = 1;
  std::vector<T> weight, bias;
  std::vector<T> grad_weight, grad_bias;

  static constexpr int K = 3;
  static constexpr int P = 1;

  void init(int in_c, int out_c, int s, SeededRng& rng) {
    in_ch = in_c;
    out_ch = out_c;
    stride = s;
    weight.resize(static_cast<size_t>(K) * K * out_ch * in_ch);
    bias.assign(out_ch, T(0));
    grad_weight.assign(weight.size(), T(0));
    grad_bias.assign(bias.size(), T(0));
    const double bound = std::sqrt(1.0 / (K * K * in_c));
    for (auto& w : weight) w = static_cast<T>(rng.uniform(-bound, bound));
  }

  int out_size(int in) const { return (in + 2 * P - K) / stride + 1; }

  Tensor<T> forward(const Tensor<T>& x) const {
    if (x.channels() != in_ch) throw std::invalid_argument("conv: channel mismatch");
    const int ho = out_size(x.height()), wo = out_size(x.width());
    Tensor<T> out(ho, wo, out_ch);
    const size_t tap_stride = static_cast<size_t>(out_ch) * in_ch;
    for (int y = 0; y < ho; ++y)
      for (int xo = 0; xo < wo; ++xo) {
        T* acc = out.pixel(y, xo);
        for (int c = 0; c < out_ch; ++c) acc[c] = bias[c];
        const int by = y * stride - P, bx = xo * stride - P;
        for (int dy = 0; dy < K; ++dy) {
          const int yy = by + dy;
          if (yy < 0 || yy >= x.height()) continue;
          for (int dx = 0; dx < K; ++dx) {
            const int xx = bx + dx;
            if (xx < 0 || xx >= x.width()) continue;
            kernels::matvec_acc(acc, weight.data() + (dy * K + dx) * tap_stride, x.pixel(yy, xx),
                                out_ch, in_ch);
          }
        }
      }
    return out;
  }

  /// Accumulates grad_weight/grad_bias and returns the gradient w.r.t. the
  /// layer input.
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
    Tensor<T> grad_in(x.height(), x.width(), in_ch);
    const size_t tap_stride = static_cast<size_t>(out_ch) * in_ch;
    for (int y = 0; y < grad_out.height(); ++y)
      for (int xo = 0; xo < grad_out.width(); ++xo) {
        const T* g = grad_out.pixel(y, xo);
        for (int c = 0; c < out_ch; ++c) grad_bias[c] += g[c];
        const int by = y * stride - P, bx = xo * stride - P;
        for (int dy = 0; dy < K; ++dy) {
          const int yy = by + dy;
          if (yy < 0 || yy >= x.height()) continue;
          for (int dx = 0; dx < K; ++dx) {
            const int xx = bx + dx;
            if (xx < 0 || xx >= x.width()) continue;
            const size_t tap = (dy * K + dx) * tap_stride;
            kernels::ger_acc(grad_weight.data() + tap, g, x.pixel(yy, xx), out_ch, in_ch);
            kernels::matvec_t_acc(grad_in.pixel(yy, xx), weight.data() + tap, g, out_ch, in_ch);
          }
        }
      }
    return grad_in;
  }
};

namespace detail {

template <typename T>
T sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

/// x * sigmoid(x), applied in place; returns the pre-activation copy.
template <typename T>
Tensor<T> silu_inplace(Tensor<T>& x) {
  Tensor<T> pre = x;
  for (size_t i = 0; i < x.size(); ++i) {
    const T z = x.data()[i];
    x.data()[i] = z * sigmoid(z);
  }
  return pre;
}

template <typename T>
Tensor<T> silu_backward(const Tensor<T>& grad_out, const Tensor<T>& pre) {
  Tensor<T> g(pre.height(), pre.width(), pre.channels());
  for (size_t i = 0; i < g.size(); ++i) {
    const T z = pre.data()[i];
    const T s = sigmoid(z);
    g.data()[i] = grad_out.data()[i] * s * (T(1) + z * (T(1) - s));
  }
  return g;
}

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
  Tensor<T> out(x.height() * 2, x.width() * 2, x.channels());
  for (int y = 0; y < out.height(); ++y)
    for (int xx = 0; xx < out.width(); ++xx) {
      const T* src = x.pixel(y / 2, xx / 2);
      T* dst = out.pixel(y, xx);
      for (int c = 0; c < x.channels(); ++c) dst[c] = src[c];
    }
  return out;
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& grad_out) {
  Tensor<T> g(grad_out.height() / 2, grad_out.width() / 2, grad_out.channels());
  for (int y = 0; y < grad_out.height(); ++y)
    for (int xx = 0; xx < grad_out.width(); ++xx) {
      const T* src = grad_out.pixel(y, xx);
      T* dst = g.pixel(y / 2, xx / 2);
      for (int c = 0; c < g.channels(); ++c) dst[c] += src[c];
    }
  return g;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> out(a.height(), a.width(), a.channels() + b.channels());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      T* dst = out.pixel(y, x);
      const T* pa = a.pixel(y, x);
      const T* pb = b.pixel(y, x);
      for (int c = 0; c < a.channels(); ++c) dst[c] = pa[c];
      for (int c = 0; c < b.channels(); ++c) dst[a.channels() + c] = pb[c];
    }
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& x, int first) {
  Tensor<T> a(x.height(), x.width(), first);
  Tensor<T> b(x.height(), x.width(), x.channels() - first);
  for (int y = 0; y < x.height(); ++y)
    for (int xx = 0; xx < x.width(); ++xx) {
      const T* src = x.pixel(y, xx);
      T* pa = a.pixel(y, xx);
      T* pb = b.pixel(y, xx);
      for (int c = 0; c < first; ++c) pa[c] = src[c];
      for (int c = first; c < x.channels(); ++c) pb[c - first] = src[c];
    }
  return {std::move(a), std::move(b)};
}

} // namespace detail

struct ToyNetConfig {
  int levels = 2;
  std::vector<int> widths = {16, 32}; // one per level
  int img_channels = 3;
  bool use_fcb = true;
  std::vector<GaussianSpec> fcb_specs = {{3, 1.0f}, {5, 2.0f}, {7, 4.0f}};
  float gamma_sigma = 1.0f;
};

template <typename T>
struct NetCache {
  Tensor<T> input;
  std::vector<Tensor<T>> skip;     // encoder features (post-silu), one per level
  std::vector<Tensor<T>> skip_pre; // pre-activations of stem/enc convs
  std::vector<Tensor<T>> down_out; // post-silu outputs of down convs
  std::vector<Tensor<T>> down_pre;
  Tensor<T> mid_pre;
  std::vector<FcbCache<T>> fcb_caches;
  std::vector<Tensor<T>> dec_in; // concatenated decoder conv inputs
  std::vector<Tensor<T>> dec_pre;
  Tensor<T> head_in;
};

/// Conditional encoder-decoder noise predictor. The input is the channel
/// concatenation of the hazy condition, the noisy image and a broadcast
/// gamma_t channel. Encoder features reach the decoder through per-level
/// skip connections; with use_fcb those connections are filter banks,
/// otherwise identity (same architecture, controlled pairing).
template <typename T>
class ToyEpsNetT : public EpsPredictor<T> {
public:
  ToyEpsNetT() = default;

  ToyEpsNetT(const ToyNetConfig& cfg, SeededRng& init_rng) : cfg_(cfg) {
    if (cfg.levels < 1) throw std::invalid_argument("toy net: levels must be >= 1");
    if (static_cast<int>(cfg.widths.size()) != cfg.levels)
      throw std::invalid_argument("toy net: widths must have one entry per level");
    const int L = cfg.levels;
    const int in_ch = 2 * cfg.img_channels + 1;

    stem_.init(in_ch, cfg.widths[0], 1, init_rng);
    down_.resize(L);
    for (int l = 0; l < L; ++l) {
      const int oc = l + 1 < L ? cfg.widths[l + 1] : cfg.widths[L - 1];
      down_[l].init(cfg.widths[l], oc, 2, init_rng);
    }
    enc_.resize(L - 1);
    for (int l = 0; l < L - 1; ++l) enc_[l].init(cfg.widths[l + 1], cfg.widths[l + 1], 1, init_rng);
    mid_.init(cfg.widths[L - 1], cfg.widths[L - 1], 1, init_rng);
    dec_.resize(L);
    for (int l = 0; l < L; ++l) {
      const int up_ch = l + 1 < L ? cfg.widths[l + 1] : cfg.widths[L - 1];
      dec_[l].init(up_ch + cfg.widths[l], cfg.widths[l], 1, init_rng);
    }
    head_.init(cfg.widths[0], cfg.img_channels, 1, init_rng);

    if (cfg.use_fcb) {
      fcbs_.reserve(L);
      for (int l = 0; l < L; ++l)
        fcbs_.push_back(build_filter_bank<T>(cfg.fcb_specs, static_cast<T>(cfg.gamma_sigma)));
      fcb_grad_w_.assign(L, std::vector<T>(fcbs_[0].branch_count(), T(0)));
    }
  }

  const ToyNetConfig& config() const { return cfg_; }
  std::vector<FilterBank<T>>& filter_banks() { return fcbs_; }
  const std::vector<FilterBank<T>>& filter_banks() const { return fcbs_; }

  std::pair<Tensor<T>, NetCache<T>> forward(const Tensor<T>& cond, const Tensor<T>& noisy,
                                            double gamma_t) {
    if (!cond.same_shape(noisy)) throw std::invalid_argument("toy net: input shape mismatch");
    const int div = 1 << cfg_.levels;
    if (cond.height() % div != 0 || cond.width() % div != 0)
      throw std::invalid_argument("toy net: spatial size must be divisible by 2^levels");

    const int L = cfg_.levels;
    NetCache<T> cache;
    cache.input = make_input(cond, noisy, gamma_t);

    cache.skip.resize(L);
    cache.skip_pre.resize(L);
    cache.down_out.resize(L);
    cache.down_pre.resize(L);

    Tensor<T> f = stem_.forward(cache.input);
    cache.skip_pre[0] = detail::silu_inplace(f);
    cache.skip[0] = f;
    for (int l = 1; l < L; ++l) {
      Tensor<T> t = down_[l - 1].forward(cache.skip[l - 1]);
      cache.down_pre[l - 1] = detail::silu_inplace(t);
      cache.down_out[l - 1] = t;
      Tensor<T> e = enc_[l - 1].forward(t);
      cache.skip_pre[l] = detail::silu_inplace(e);
      cache.skip[l] = e;
    }
    Tensor<T> x = down_[L - 1].forward(cache.skip[L - 1]);
    cache.down_pre[L - 1] = detail::silu_inplace(x);
    cache.down_out[L - 1] = x;
    x = mid_.forward(x);
    cache.mid_pre = detail::silu_inplace(x);

    cache.dec_in.resize(L);
    cache.dec_pre.resize(L);
    if (cfg_.use_fcb) cache.fcb_caches.resize(L);
    for (int l = L - 1; l >= 0; --l) {
      Tensor<T> up = detail::upsample2(x);
      Tensor<T> skip;
      if (cfg_.use_fcb) {
        FcbResult<T> r = fcb_forward(cache.skip[l], fcbs_[l]);
        skip = std::move(r.output);
        cache.fcb_caches[l] = std::move(r.cache);
      } else {
        skip = cache.skip[l];
      }
      cache.dec_in[l] = detail::concat_channels(up, skip);
      x = dec_[l].forward(cache.dec_in[l]);
      cache.dec_pre[l] = detail::silu_inplace(x);
    }
    cache.head_in = x;
    Tensor<T> eps_hat = head_.forward(x);
    return {std::move(eps_hat), std::move(cache)};
  }

  /// Exact backward pass; all parameter gradients accumulate.
  void backward(const NetCache<T>& cache, const Tensor<T>& grad_eps_hat) {
    const int L = cfg_.levels;
    std::vector<Tensor<T>> grad_skip(L);

    Tensor<T> g = head_.backward(cache.head_in, grad_eps_hat);
    for (int l = 0; l < L; ++l) {
      g = detail::silu_backward(g, cache.dec_pre[l]);
      Tensor<T> g_cat = dec_[l].backward(cache.dec_in[l], g);
      const int up_ch = l + 1 < L ? cfg_.widths[l + 1] : cfg_.widths[L - 1];
      auto [g_up, g_skip] = detail::split_channels(g_cat, up_ch);
      if (cfg_.use_fcb) {
        FcbGrads<T> fg = fcb_backward(g_skip, cache.fcb_caches[l], fcbs_[l]);
        for (int j = 0; j < fcbs_[l].branch_count(); ++j)
          fcb_grad_w_[l][j] += fg.grad_weights[j];
        grad_skip[l] = std::move(fg.grad_input);
      } else {
        grad_skip[l] = std::move(g_skip);
      }
      g = detail::upsample2_backward(g_up);
    }

    g = detail::silu_backward(g, cache.mid_pre);
    g = mid_.backward(cache.down_out[L - 1], g);
    g = detail::silu_backward(g, cache.down_pre[L - 1]);
    g = down_[L - 1].backward(cache.skip[L - 1], g);
    kernels::axpy(grad_skip[L - 1].data(), g.data(), T(1), g.size());

    for (int l = L - 1; l >= 1; --l) {
      Tensor<T> gf = detail::silu_backward(grad_skip[l], cache.skip_pre[l]);
      Tensor<T> gd = enc_[l - 1].backward(cache.down_out[l - 1], gf);
      gd = detail::silu_backward(gd, cache.down_pre[l - 1]);
      gd = down_[l - 1].backward(cache.skip[l - 1], gd);
      kernels::axpy(grad_skip[l - 1].data(), gd.data(), T(1), gd.size());
    }
    Tensor<T> g0 = detail::silu_backward(grad_skip[0], cache.skip_pre[0]);
    stem_.backward(cache.input, g0);
  }

  Tensor<T> predict(const Tensor<T>& cond, const Tensor<T>& noisy, double gamma_t) override {
    return forward(cond, noisy, gamma_t).first;
  }

  /// Visits (weights, grads) pairs in a fixed order (convs, then FCB weights).
  void for_each_param(const std::function<void(std::vector<T>&, std::vector<T>&)>& fn) {
    auto conv = [&](ConvLayer<T>& c) {
      fn(c.weight, c.grad_weight);
      fn(c.bias, c.grad_bias);
    };
    conv(stem_);
    for (auto& c : down_) conv(c);
    for (auto& c : enc_) conv(c);
    conv(mid_);
    for (auto& c : dec_) conv(c);
    conv(head_);
    for (size_t l = 0; l < fcbs_.size(); ++l) fn(fcbs_[l].weights, fcb_grad_w_[l]);
  }

  void zero_grads() {
    for_each_param([](std::vector<T>&, std::vector<T>& g) { std::fill(g.begin(), g.end(), T(0)); });
  }

  size_t param_count() {
    size_t n = 0;
    for_each_param([&](std::vector<T>& w, std::vector<T>&) { n += w.size(); });
    return n;
  }

  /// theta -= lr * grad across every parameter.
  void sgd_step(double lr) {
    for_each_param([lr](std::vector<T>& w, std::vector<T>& g) {
      for (size_t i = 0; i < w.size(); ++i) w[i] -= static_cast<T>(lr) * g[i];
    });
  }

private:
  Tensor<T> make_input(const Tensor<T>& cond, const Tensor<T>& noisy, double gamma_t) const {
    if (cond.channels() != cfg_.img_channels)
      throw std::invalid_argument("toy net: condition channel mismatch");
    Tensor<T> in(cond.height(), cond.width(), 2 * cfg_.img_channels + 1);
    const int c = cfg_.img_channels;
    const T gval = static_cast<T>(gamma_t);
    for (int y = 0; y < cond.height(); ++y)
      for (int x = 0; x < cond.width(); ++x) {
        T* dst = in.pixel(y, x);
        const T* pc = cond.pixel(y, x);
        const T* pn = noisy.pixel(y, x);
        for (int i = 0; i < c; ++i) dst[i] = pc[i];
        for (int i = 0; i < c; ++i) dst[c + i] = pn[i];
        dst[2 * c] = gval;
      }
    return in;
  }

  ToyNetConfig cfg_;
  ConvLayer<T> stem_, mid_, head_;
  std::vector<ConvLayer<T>> down_, enc_, dec_;
  std::vector<FilterBank<T>> fcbs_;
  std::vector<std::vector<T>> fcb_grad_w_;
};

using ToyEpsNet = ToyEpsNetT<float>;

/// Training hyper-parameters. Full-scale reference values: lr 1e-4 with a
/// 0.7 decay every 0.4M iterations, batch 3 at 128x128, 2M iterations.
/// Desk defaults train the toy net on CPU in minutes.
struct TrainConfig {
  int iters = 5000;
  double lr = 0.02;
  double lr_decay = 0.7;
  int decay_every = 2000;
  int batch = 1;
  int crop = 32;
  uint64_t seed = 0;
  bool use_fcb = true;

  void validate() const {
    if (iters < 0) throw std::invalid_argument("train: iters must be >= 0");
    if (!(lr >= 0.0)) throw std::invalid_argument("train: lr must be >= 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
      throw std::invalid_argument("train: lr_decay must be in (0,1]");
    if (decay_every < 1) throw std::invalid_argument("train: decay_every must be >= 1");
    if (batch < 1) throw std::invalid_argument("train: batch must be >= 1");
    if (crop < 4) throw std::invalid_argument("train: crop must be >= 4");
  }
};

struct TrainResult {
  ToyEpsNet model;
  std::vector<std::pair<int, float>> loss_curve; // (iteration, batch-mean loss)
};

namespace detail {

inline ImageTensor crop_image(const ImageTensor& img, int y0, int x0, int side) {
  ImageTensor out(side, side, img.channels());
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

} // namespace detail

/// Deterministic SGD training loop: per iteration, draw batch samples (and
/// optionally re-synthesize their hazy inputs with the augmentation), take
/// random crops, accumulate the noise-prediction loss gradients, and apply a
/// plain SGD step with the stepwise-decayed learning rate.
inline TrainResult train(std::span<const SyntheticPair> dataset, const TrainConfig& cfg,
                         const NoiseSchedule& sched, const HazeAugConfig* aug,
                         const ToyNetConfig& net_cfg_in = ToyNetConfig{}) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  cfg.validate();
  ToyNetConfig net_cfg = net_cfg_in;
  net_cfg.use_fcb = cfg.use_fcb;
  if (cfg.crop % (1 << net_cfg.levels) != 0)
    throw std::invalid_argument("train: crop must be divisible by 2^levels");
  for (const auto& pair : dataset)
    if (pair.clean.height() < cfg.crop || pair.clean.width() < cfg.crop)
      throw std::invalid_argument("train: image smaller than crop");

  SeededRng init_rng(cfg.seed);
  TrainResult res{ToyEpsNet(net_cfg, init_rng), {}};
  SeededRng data_rng = init_rng.fork(1);

  double lr = cfg.lr;
  res.loss_curve.reserve(cfg.iters);
  for (int it = 1; it <= cfg.iters; ++it) {
    res.model.zero_grads();
    float loss_sum = 0.0f;
    for (int b = 0; b < cfg.batch; ++b) {
      const size_t idx = data_rng.uniform_index(dataset.size());
      const SyntheticPair& pair = dataset[idx];
      const int y0 =
          static_cast<int>(data_rng.uniform_index(pair.clean.height() - cfg.crop + 1));
      const int x0 =
          static_cast<int>(data_rng.uniform_index(pair.clean.width() - cfg.crop + 1));
      ImageTensor hazy =
          aug ? haze_aug(idx, dataset, data_rng, *aug) : pair.hazy;
      ImageTensor cond = detail::crop_image(hazy, y0, x0, cfg.crop);
      ImageTensor clean = detail::crop_image(pair.clean, y0, x0, cfg.crop);
      loss_sum += training_loss(res.model, cond, clean, data_rng, sched);
    }
    const float mean_loss = loss_sum / cfg.batch;
    if (!std::isfinite(mean_loss)) throw NumericError("train: loss is not finite");
    if (cfg.lr != 0.0) res.model.sgd_step(lr / cfg.batch);
    if (it % cfg.decay_every == 0) lr *= cfg.lr_decay;
    res.loss_curve.emplace_back(it, mean_loss);
  }
  return res;
}

/// For each (hazy, clean) pair: draw eps, corrupt the clean image to step t,
/// and return the model's noise prediction.
template <typename T>
std::vector<Tensor<T>> predict_eps_batch(EpsPredictor<T>& model,
                                         std::span<const SyntheticPair> pairs, int t,
                                         const NoiseSchedule& sched, SeededRng& rng) {
  std::vector<Tensor<T>> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    Tensor<T> cond = to_model_range(pair.hazy.template cast<T>());
    Tensor<T> clean = to_model_range(pair.clean.template cast<T>());
    Tensor<T> eps = randn<T>(clean.height(), clean.width(), clean.channels(), rng);
    Tensor<T> noisy = forward_diffuse(clean, t, eps, sched);
    out.push_back(model.predict(cond, noisy, sched.gamma_at(t)));
  }
  return out;
}

/// Per-block trainable weight vectors with their skip-level indices
/// (level 0 is the outermost skip). Empty when the net has plain skips.
inline std::vector<std::pair<int, std::vector<float>>> export_weights(ToyEpsNet& model) {
  std::vector<std::pair<int, std::vector<float>>> rows;
  const auto& banks = model.filter_banks();
  for (size_t l = 0; l < banks.size(); ++l) rows.emplace_back(static_cast<int>(l), banks[l].weights);
  return rows;
}

} // namespace hazediff
