// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "hazediff/fcb.hpp" // gaussian_kernel for the SSIM window
#include "hazediff/tensor.hpp"

namespace hazediff {

struct MetricReport {
  double psnr = 0.0;  // dB, capped at 99 for identical inputs
  double ssim = 0.0;  // [-1, 1]
  double ciede = 0.0; // mean deltaE00 >= 0
};

/// 10*log10(1/MSE) for [0,1] images; identical inputs report the 99 dB cap.
inline double psnr(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: dimension mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse <= 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

inline Tensor<double> to_luma(const ImageTensor& img) {
  Tensor<double> out(img.height(), img.width(), 1);
  if (img.channels() == 1) {
    for (size_t i = 0; i < img.size(); ++i) out.data()[i] = img.data()[i];
  } else if (img.channels() == 3) {
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const float* p = img.pixel(y, x);
        out.at(y, x, 0) = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
      }
  } else {
    throw std::invalid_argument("ssim: channels must be 1 or 3");
  }
  return out;
}

} // namespace detail

/// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1. Color inputs are converted to luma
/// (0.299R + 0.587G + 0.114B); only fully interior windows contribute.
inline double ssim(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: dimension mismatch");
  constexpr int win = 11;
  constexpr int r = win / 2;
  if (a.height() < win || a.width() < win)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  const auto kernel = gaussian_kernel<double>({win, 1.5f});
  const Tensor<double> x = detail::to_luma(a);
  const Tensor<double> y = detail::to_luma(b);

  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;

  double total = 0.0;
  long long count = 0;
  for (int cy = r; cy < a.height() - r; ++cy)
    for (int cx = r; cx < a.width() - r; ++cx) {
      double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const double w = kernel[(dy + r) * win + (dx + r)];
          const double vx = x.at(cy + dy, cx + dx, 0);
          const double vy = y.at(cy + dy, cx + dx, 0);
          mx += w * vx;
          my += w * vy;
          mxx += w * vx * vx;
          myy += w * vy * vy;
          mxy += w * vx * vy;
        }
      const double sx = mxx - mx * mx;
      const double sy = myy - my * my;
      const double sxy = mxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * sxy + c2)) /
               ((mx * mx + my * my + c1) * (sx + sy + c2));
      count += 1;
    }
  return total / static_cast<double>(count);
}

struct Lab {
  double l = 0, a = 0, b = 0;
};

/// sRGB (D65, standard transfer function) to CIELAB.
inline Lab srgb_to_lab(double r, double g, double b) {
  auto linear = [](double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  };
  const double rl = linear(r), gl = linear(g), bl = linear(b);
  const double xr = (0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl) / 0.95047;
  const double yr = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double zr = (0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl) / 1.08883;
  auto f = [](double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
  };
  const double fx = f(xr), fy = f(yr), fz = f(zr);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

/// CIEDE2000 color difference with kL = kC = kH = 1, including the hue
/// rotation term.
inline double ciede2000_pair(const Lab& p, const Lab& q) {
  const double pi = 3.14159265358979323846;
  auto deg2rad = [pi](double d) { return d * pi / 180.0; };
  auto rad2deg = [pi](double r) { return r * 180.0 / pi; };

  const double c1 = std::hypot(p.a, p.b);
  const double c2 = std::hypot(q.a, q.b);
  const double cbar = 0.5 * (c1 + c2);
  const double cbar7 = std::pow(cbar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(cbar7 / (cbar7 + std::pow(25.0, 7.0))));

  const double a1p = (1.0 + g) * p.a;
  const double a2p = (1.0 + g) * q.a;
  const double c1p = std::hypot(a1p, p.b);
  const double c2p = std::hypot(a2p, q.b);

  auto hue = [&](double ap, double b) {
    if (ap == 0.0 && b == 0.0) return 0.0;
    double h = rad2deg(std::atan2(b, ap));
    return h < 0.0 ? h + 360.0 : h;
  };
  const double h1p = hue(a1p, p.b);
  const double h2p = hue(a2p, q.b);

  const double dlp = q.l - p.l;
  const double dcp = c2p - c1p;

  double dhp = 0.0;
  if (c1p * c2p != 0.0) {
    dhp = h2p - h1p;
    if (dhp > 180.0) dhp -= 360.0;
    else if (dhp < -180.0) dhp += 360.0;
  }
  const double dHp = 2.0 * std::sqrt(c1p * c2p) * std::sin(deg2rad(dhp) / 2.0);

  const double lbar = 0.5 * (p.l + q.l);
  const double cbarp = 0.5 * (c1p + c2p);

  double hbar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= 180.0) hbar = 0.5 * (h1p + h2p);
    else if (h1p + h2p < 360.0) hbar = 0.5 * (h1p + h2p + 360.0);
    else hbar = 0.5 * (h1p + h2p - 360.0);
  }

  const double t = 1.0 - 0.17 * std::cos(deg2rad(hbar - 30.0)) +
                   0.24 * std::cos(deg2rad(2.0 * hbar)) +
                   0.32 * std::cos(deg2rad(3.0 * hbar + 6.0)) -
                   0.20 * std::cos(deg2rad(4.0 * hbar - 63.0));
  const double dtheta = 30.0 * std::exp(-((hbar - 275.0) / 25.0) * ((hbar - 275.0) / 25.0));
  const double cbarp7 = std::pow(cbarp, 7.0);
  const double rc = 2.0 * std::sqrt(cbarp7 / (cbarp7 + std::pow(25.0, 7.0)));
  const double lm50 = (lbar - 50.0) * (lbar - 50.0);
  const double sl = 1.0 + 0.015 * lm50 / std::sqrt(20.0 + lm50);
  const double sc = 1.0 + 0.045 * cbarp;
  const double sh = 1.0 + 0.015 * cbarp * t;
  const double rt = -std::sin(deg2rad(2.0 * dtheta)) * rc;

  const double vl = dlp / sl;
  const double vc = dcp / sc;
  const double vh = dHp / sh;
  return std::sqrt(vl * vl + vc * vc + vh * vh + rt * vc * vh);
}

/// Mean per-pixel CIEDE2000 between two RGB images ([0,1] sRGB-encoded).
inline double ciede_image(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ciede_image: dimension mismatch");
  if (a.channels() != 3) throw std::invalid_argument("ciede_image: RGB input required");
  double total = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const float* pa = a.pixel(y, x);
      const float* pb = b.pixel(y, x);
      total += ciede2000_pair(srgb_to_lab(pa[0], pa[1], pa[2]), srgb_to_lab(pb[0], pb[1], pb[2]));
    }
  return total / (static_cast<double>(a.height()) * a.width());
}

inline MetricReport compute_metrics(const ImageTensor& a, const ImageTensor& b) {
  return {psnr(a, b), ssim(a, b), ciede_image(a, b)};
}

} // namespace hazediff
