// SPDX-License-Identifier: Apache-2.0
#include "hazediff/fft2d.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace hazediff {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex g_plan_mutex;

void run_dft(const fftw_complex* in, fftw_complex* out, int h, int w, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    // FFTW_ESTIMATE keeps planning heuristic-only, so results are
    // reproducible run to run.
    plan = fftw_plan_dft_2d(h, w, const_cast<fftw_complex*>(in), out, sign,
                            FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  if (!plan) throw std::runtime_error("fft2d: planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
}

} // namespace

std::vector<std::complex<double>> fft2d_forward(const std::vector<double>& plane, int h, int w) {
  if (h < 1 || w < 1 || plane.size() != static_cast<size_t>(h) * w)
    throw std::invalid_argument("fft2d_forward: bad dimensions");
  std::vector<std::complex<double>> in(plane.size()), out(plane.size());
  for (size_t i = 0; i < plane.size(); ++i) in[i] = plane[i];
  run_dft(reinterpret_cast<const fftw_complex*>(in.data()),
          reinterpret_cast<fftw_complex*>(out.data()), h, w, FFTW_FORWARD);
  return out;
}

std::vector<std::complex<double>> fft2d_inverse(const std::vector<std::complex<double>>& spec,
                                                int h, int w) {
  if (h < 1 || w < 1 || spec.size() != static_cast<size_t>(h) * w)
    throw std::invalid_argument("fft2d_inverse: bad dimensions");
  std::vector<std::complex<double>> out(spec.size());
  run_dft(reinterpret_cast<const fftw_complex*>(spec.data()),
          reinterpret_cast<fftw_complex*>(out.data()), h, w, FFTW_BACKWARD);
  const double norm = 1.0 / (static_cast<double>(h) * w);
  for (auto& v : out) v *= norm;
  return out;
}

namespace {

std::vector<std::complex<double>> roll(const std::vector<std::complex<double>>& spec, int h, int w,
                                       int dy, int dx) {
  std::vector<std::complex<double>> out(spec.size());
  for (int y = 0; y < h; ++y) {
    int ty = (y + dy) % h;
    for (int x = 0; x < w; ++x) {
      int tx = (x + dx) % w;
      out[static_cast<size_t>(ty) * w + tx] = spec[static_cast<size_t>(y) * w + x];
    }
  }
  return out;
}

} // namespace

std::vector<std::complex<double>> fftshift(const std::vector<std::complex<double>>& spec, int h,
                                           int w) {
  return roll(spec, h, w, h / 2, w / 2);
}

std::vector<std::complex<double>> fftshift_back(const std::vector<std::complex<double>>& spec,
                                                int h, int w) {
  return roll(spec, h, w, h - h / 2, w - w / 2);
}

} // namespace hazediff
