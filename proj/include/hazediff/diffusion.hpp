// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hazediff/rng.hpp"
#include "hazediff/simd/kernels.hpp"
#include "hazediff/tensor.hpp"

namespace hazediff {

/// Per-step retain factors alpha_t and their cumulative products gamma_t.
/// Stored in double so the cumulative product stays tight over thousands of
/// steps; t is 1-based in [1, T].
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> alpha;
  std::vector<double> gamma;

  double alpha_at(int t) const {
    check(t);
    return alpha[t - 1];
  }
  double gamma_at(int t) const {
    check(t);
    return gamma[t - 1];
  }

private:
  void check(int t) const {
    if (t < 1 || t > steps) throw std::invalid_argument("noise schedule: t out of range");
  }
};

/// Linear beta schedule: alpha_t = 1 - beta_t with beta linearly spaced over
/// [beta_start, beta_end]; gamma is the running product.
inline NoiseSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw std::invalid_argument("make_schedule: steps must be >= 1");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
    throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");

  NoiseSchedule s;
  s.steps = steps;
  s.alpha.resize(steps);
  s.gamma.resize(steps);
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    double beta =
        steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * t / (steps - 1.0);
    s.alpha[t] = 1.0 - beta;
    prod *= s.alpha[t];
    s.gamma[t] = prod;
  }
  return s;
}

/// Gaussian tensor with independent N(0,1) entries in row-major draw order.
template <typename T>
Tensor<T> randn(int h, int w, int c, SeededRng& rng) {
  Tensor<T> out(h, w, c);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = static_cast<T>(rng.normal());
  return out;
}

/// Forward corruption: J_t = sqrt(gamma_t) J_0 + sqrt(1 - gamma_t) eps.
/// J_0 is expected in model range [-1, 1].
template <typename T>
Tensor<T> forward_diffuse(const Tensor<T>& clean, int t, const Tensor<T>& eps,
                          const NoiseSchedule& sched) {
  if (!clean.same_shape(eps)) throw std::invalid_argument("forward_diffuse: shape mismatch");
  const double g = sched.gamma_at(t);
  Tensor<T> out(clean.height(), clean.width(), clean.channels());
  kernels::axpby(out.data(), clean.data(), static_cast<T>(std::sqrt(g)), eps.data(),
                 static_cast<T>(std::sqrt(1.0 - g)), out.size());
  return out;
}

/// One stochastic reverse step. The noise term is omitted at t = 1 so the
/// final step is deterministic.
template <typename T>
Tensor<T> ddpm_step(const Tensor<T>& noisy, const Tensor<T>& eps_hat, int t,
                    const NoiseSchedule& sched, SeededRng& rng) {
  if (!noisy.same_shape(eps_hat)) throw std::invalid_argument("ddpm_step: shape mismatch");
  const double a = sched.alpha_at(t);
  const double g = sched.gamma_at(t);
  const double coef = (1.0 - a) / std::sqrt(1.0 - g);
  const double inv_sqrt_a = 1.0 / std::sqrt(a);

  Tensor<T> out(noisy.height(), noisy.width(), noisy.channels());
  kernels::axpby(out.data(), noisy.data(), static_cast<T>(inv_sqrt_a), eps_hat.data(),
                 static_cast<T>(-coef * inv_sqrt_a), out.size());
  if (t > 1) {
    const T amp = static_cast<T>(std::sqrt(1.0 - a));
    for (size_t i = 0; i < out.size(); ++i)
      out.data()[i] += amp * static_cast<T>(rng.normal());
  }
  return out;
}

/// Noise-prediction surface used by the samplers: eps_hat = f(I, J_t, gamma_t).
template <typename T>
class EpsPredictor {
public:
  virtual ~EpsPredictor() = default;
  virtual Tensor<T> predict(const Tensor<T>& cond, const Tensor<T>& noisy, double gamma_t) = 0;
};

/// Maps an image from [0,1] to model range [-1,1], clamping over-ranged
/// inputs (hard haze samples may exceed 1) at this boundary only.
template <typename T>
Tensor<T> to_model_range(const Tensor<T>& img01) {
  Tensor<T> out(img01.height(), img01.width(), img01.channels());
  for (size_t i = 0; i < out.size(); ++i) {
    T v = img01.data()[i];
    v = v < T(0) ? T(0) : (v > T(1) ? T(1) : v);
    out.data()[i] = T(2) * v - T(1);
  }
  return out;
}

template <typename T>
Tensor<T> from_model_range(const Tensor<T>& img) {
  Tensor<T> out(img.height(), img.width(), img.channels());
  for (size_t i = 0; i < out.size(); ++i)
    out.data()[i] = (img.data()[i] + T(1)) / T(2);
  return out;
}

/// Evenly spaced sub-schedule indices: round(j*T/n) for j = 1..n. Distinct
/// and ending at T; n = T visits every step.
inline std::vector<int> ddim_substeps(int total_steps, int n_steps) {
  if (n_steps < 1 || n_steps > total_steps)
    throw std::invalid_argument("ddim: n_steps must be in [1, T]");
  std::vector<int> taus(n_steps);
  for (int j = 1; j <= n_steps; ++j)
    taus[j - 1] = static_cast<int>(
        std::lround(static_cast<double>(j) * total_steps / n_steps));
  return taus;
}

/// Deterministic (eta = 0) sampling over an evenly spaced sub-schedule, with
/// the running clean estimate clamped to [-1,1]. After clamping, the noise
/// direction is re-derived from the clamped estimate so the state pair stays
/// consistent; with exact predictions this equals the raw model output, but
/// it keeps a weak predictor's magnitude drift from feeding back through
/// long chains. Runs n_avg independent chains from per-chain forked seeds
/// and averages pixelwise; input and output are [0,1] images.
template <typename T>
Tensor<T> ddim_sample(EpsPredictor<T>& model, const Tensor<T>& cond01, const NoiseSchedule& sched,
                      int n_steps, SeededRng& rng, int n_avg) {
  if (n_avg < 1) throw std::invalid_argument("ddim: n_avg must be >= 1");
  const auto taus = ddim_substeps(sched.steps, n_steps);
  const Tensor<T> cond = to_model_range(cond01);
  const int h = cond.height(), w = cond.width(), c = cond.channels();

  // One draw from the caller advances its stream; chains then run on
  // independent forked streams (parallelizable without changing results).
  const SeededRng chain_base(rng.next_u64());

  Tensor<T> acc(h, w, c);
  for (int chain = 0; chain < n_avg; ++chain) {
    SeededRng chain_rng = chain_base.fork(chain);
    Tensor<T> x = randn<T>(h, w, c, chain_rng);
    for (int idx = n_steps - 1; idx >= 0; --idx) {
      const double g = sched.gamma_at(taus[idx]);
      Tensor<T> eps_hat = model.predict(cond, x, g);
      Tensor<T> x0(h, w, c);
      const T a0 = static_cast<T>(1.0 / std::sqrt(g));
      const T b0 = static_cast<T>(-std::sqrt(1.0 - g) / std::sqrt(g));
      kernels::axpby(x0.data(), x.data(), a0, eps_hat.data(), b0, x0.size());
      for (size_t i = 0; i < x0.size(); ++i) {
        T v = x0.data()[i];
        x0.data()[i] = v < T(-1) ? T(-1) : (v > T(1) ? T(1) : v);
      }
      if (idx > 0) {
        // eps consistent with the clamped estimate
        const T ae = static_cast<T>(1.0 / std::sqrt(1.0 - g));
        const T be = static_cast<T>(-std::sqrt(g) / std::sqrt(1.0 - g));
        kernels::axpby(eps_hat.data(), x.data(), ae, x0.data(), be, eps_hat.size());
        const double gp = sched.gamma_at(taus[idx - 1]);
        kernels::axpby(x.data(), x0.data(), static_cast<T>(std::sqrt(gp)), eps_hat.data(),
                       static_cast<T>(std::sqrt(1.0 - gp)), x.size());
      } else {
        x = std::move(x0);
      }
    }
    kernels::axpy(acc.data(), x.data(), T(1), acc.size());
  }
  for (size_t i = 0; i < acc.size(); ++i) acc.data()[i] /= static_cast<T>(n_avg);
  return from_model_range(acc);
}

/// Samples (t, eps), corrupts the clean image, runs the model, and returns
/// the mean-reduced L1 loss; the model accumulates its parameter gradients.
/// `cond01` and `clean01` are [0,1] images; the model sees [-1,1].
///
/// Model requirements: forward(cond, noisy, gamma_t) -> (eps_hat, cache) and
/// backward(cache, grad_eps_hat).
template <typename T, typename Model>
T training_loss(Model& model, const Tensor<T>& cond01, const Tensor<T>& clean01, SeededRng& rng,
                const NoiseSchedule& sched) {
  if (cond01.height() != clean01.height() || cond01.width() != clean01.width())
    throw std::invalid_argument("training_loss: image dimension mismatch");

  const Tensor<T> cond = to_model_range(cond01);
  const Tensor<T> clean = to_model_range(clean01);

  const int t = 1 + static_cast<int>(rng.uniform_index(sched.steps));
  Tensor<T> eps = randn<T>(clean.height(), clean.width(), clean.channels(), rng);
  Tensor<T> noisy = forward_diffuse(clean, t, eps, sched);

  auto [eps_hat, cache] = model.forward(cond, noisy, sched.gamma_at(t));

  const size_t n = eps.size();
  Tensor<T> grad(eps.height(), eps.width(), eps.channels());
  T loss_sum{};
  const T inv_n = T(1) / static_cast<T>(n);
  for (size_t i = 0; i < n; ++i) {
    const T d = eps_hat.data()[i] - eps.data()[i];
    loss_sum += d < T(0) ? -d : d;
    grad.data()[i] = d > T(0) ? inv_n : (d < T(0) ? -inv_n : T(0));
  }
  model.backward(cache, grad);
  return loss_sum * inv_n;
}

} // namespace hazediff
