// SPDX-License-Identifier: Apache-2.0
// Power-spectrum instruments: 2-D spectrum vs direct-summation DFT oracle,
// radial binning symmetry, Parseval, and KL-to-flat calibration.

#include <doctest.h>

#include <cmath>

#include "hazediff/diffusion.hpp"
#include "hazediff/spectral.hpp"
#include "support.hpp"

using namespace hazediff;
using testsupport::dft2d_naive;

TEST_CASE("power_spectrum_2d") {
  SUBCASE("constant image: everything at the DC bin") {
    const float c = 0.7f;
    ImageTensor img(8, 8, 1, c);
    auto power = power_spectrum_2d(img);
    const double dc = static_cast<double>(c) * c * 64.0; // c^2 * H * W
    CHECK(power[4 * 8 + 4] == doctest::Approx(dc).epsilon(1e-6));
    for (int i = 0; i < 64; ++i)
      if (i != 4 * 8 + 4) CHECK(power[i] <= 1e-8);
  }

  SUBCASE("integer-frequency sinusoid concentrates in the conjugate pair") {
    const int n = 16;
    ImageTensor img(n, n, 1);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        img.at(y, x, 0) = std::cos(2.0 * 3.14159265358979 * 3.0 * x / n);
    auto power = power_spectrum_2d(img);
    // conjugate bins at (cy, cx +- 3)
    const int cy = n / 2, cx = n / 2;
    double inside = power[cy * n + cx + 3] + power[cy * n + cx - 3];
    double total = 0.0;
    for (double p : power) total += p;
    CHECK(inside / total > 0.999);
  }

  SUBCASE("8x8 random image matches the naive DFT oracle") {
    SeededRng rng(5);
    ImageTensor img = testsupport::random_tensor_f(8, 8, 1, rng);
    auto power = power_spectrum_2d(img);

    std::vector<double> plane(64);
    for (int i = 0; i < 64; ++i) plane[i] = img.data()[i];
    auto spec = dft2d_naive(plane, 8, 8);
    // center manually and compare |F|^2 / (H W)
    for (int u = 0; u < 8; ++u)
      for (int v = 0; v < 8; ++v) {
        const int cu = (u + 4) % 8, cv = (v + 4) % 8;
        const double want = std::norm(spec[u * 8 + v]) / 64.0;
        CHECK(testsupport::rel_err(power[cu * 8 + cv], want) < 1e-6);
      }
  }

  SUBCASE("multi-channel input rejected") {
    CHECK_THROWS(power_spectrum_2d(ImageTensor(4, 4, 3, 0.1f)));
  }
}

TEST_CASE("parseval: spectrum power equals signal energy") {
  SeededRng rng(6);
  ImageTensor img = testsupport::random_tensor_f(12, 9, 1, rng, -1.0, 1.0);
  auto power = power_spectrum_2d(img);
  double lhs = 0.0, rhs = 0.0;
  for (double p : power) lhs += p;
  for (size_t i = 0; i < img.size(); ++i)
    rhs += static_cast<double>(img.data()[i]) * img.data()[i];
  CHECK(testsupport::rel_err(lhs, rhs) < 1e-5);
}

TEST_CASE("radial_psd") {
  SUBCASE("constant image: all power in bin 0") {
    ImageTensor img(16, 16, 1, 0.5f);
    RadialPSD curve = radial_psd(img, 8);
    CHECK(curve.power[0] > 0.0);
    for (int i = 1; i < 8; ++i) CHECK(curve.power[i] <= 1e-10);
  }

  SUBCASE("90-degree rotation leaves the curve unchanged") {
    SeededRng rng(7);
    ImageTensor img = testsupport::random_tensor_f(16, 16, 1, rng);
    ImageTensor rot(16, 16, 1);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) rot.at(x, 15 - y, 0) = img.at(y, x, 0);
    RadialPSD a = radial_psd(img, 8);
    RadialPSD b = radial_psd(rot, 8);
    for (int i = 0; i < 8; ++i)
      CHECK(testsupport::rel_err(a.power[i], b.power[i]) < 1e-6);
  }

  SUBCASE("bin count limits") {
    ImageTensor img(16, 16, 1, 0.5f);
    CHECK_THROWS(radial_psd(img, 1));
    CHECK_THROWS(radial_psd(img, 9)); // floor(16/2) = 8
  }

  SUBCASE("white noise averaged over 100 draws is flat") {
    // 16 annuli keep >= 30 cells in the tightest ring; at 32 the innermost
    // ring has only 4 independent cells and the ratio statistic gets noisy
    SeededRng rng(8);
    const int n = 64, bins = 16;
    std::vector<double> mean(bins, 0.0);
    for (int draw = 0; draw < 100; ++draw) {
      ImageTensor noise = randn<float>(n, n, 1, rng);
      RadialPSD curve = radial_psd(noise, bins);
      for (int i = 0; i < bins; ++i) mean[i] += curve.power[i];
    }
    double lo = 1e300, hi = 0.0;
    for (int i = 1; i < bins; ++i) {
      lo = std::min(lo, mean[i]);
      hi = std::max(hi, mean[i]);
    }
    CHECK(hi / lo <= 1.1);
  }
}

TEST_CASE("psd_kl") {
  SUBCASE("identical curves give exactly zero") {
    RadialPSD flat = flat_reference(16);
    CHECK(psd_kl(flat, flat) == 0.0);
  }

  SUBCASE("hand-evaluated two-term sum (three bins, DC excluded)") {
    RadialPSD p, q;
    p.freq = q.freq = {0.0, 0.25, 0.5};
    p.power = {0.123, 0.75, 0.25}; // DC value is ignored by the KL
    q.power = {9.0, 0.5, 0.5};
    const double want = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
    CHECK(psd_kl(p, q) == doctest::Approx(want).epsilon(1e-9));
    CHECK(psd_kl(p, q) == doctest::Approx(0.1308).epsilon(1e-3));
  }

  SUBCASE("nonnegative over random curve pairs") {
    SeededRng rng(9);
    for (int trial = 0; trial < 10000; ++trial) {
      RadialPSD p, q;
      const int bins = 6;
      p.freq.resize(bins);
      q.freq.resize(bins);
      p.power.resize(bins);
      q.power.resize(bins);
      for (int i = 0; i < bins; ++i) {
        p.power[i] = rng.uniform() + 1e-6;
        q.power[i] = rng.uniform() + 1e-6;
      }
      CHECK(psd_kl(p, q) >= 0.0);
    }
  }

  SUBCASE("bin mismatch rejected") {
    CHECK_THROWS(psd_kl(flat_reference(8), flat_reference(9)));
  }
}

TEST_CASE("flat_reference") {
  RadialPSD flat = flat_reference(4);
  for (int i = 0; i < 4; ++i) CHECK(flat.power[i] == doctest::Approx(0.25));
  CHECK(flat.freq[3] == doctest::Approx(0.5));
  CHECK(psd_kl(flat, flat) == 0.0);
}

TEST_CASE("white-noise KL to flat is small and shrinks with averaging") {
  SeededRng rng(10);
  const int n = 64, bins = 32;
  const RadialPSD flat = flat_reference(bins);

  RadialPSD one_draw = radial_psd(randn<float>(n, n, 1, rng), bins);
  const double kl_one = psd_kl(one_draw, flat);

  RadialPSD avg;
  avg.freq = one_draw.freq;
  avg.power.assign(bins, 0.0);
  for (int draw = 0; draw < 100; ++draw) {
    RadialPSD c = radial_psd(randn<float>(n, n, 1, rng), bins);
    for (int i = 0; i < bins; ++i) avg.power[i] += c.power[i] / 100.0;
  }
  const double kl_avg = psd_kl(avg, flat);
  CHECK(kl_avg <= 0.01);
  CHECK(kl_avg < kl_one);
}
