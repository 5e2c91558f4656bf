// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "hazediff/haze_synth.hpp"
#include "support.hpp"

using namespace hazediff;

TEST_CASE("normalize_depth") {
  SUBCASE("constant map scales to 1") {
    DepthMap d(3, 3, 1, 5.0f);
    DepthMap n = normalize_depth(d);
    for (size_t i = 0; i < n.size(); ++i) CHECK(n.data()[i] == 1.0f);
  }
  SUBCASE("{1,2,4} becomes {0.25,0.5,1}") {
    DepthMap d(1, 3, 1);
    d.at(0, 0, 0) = 1.0f;
    d.at(0, 1, 0) = 2.0f;
    d.at(0, 2, 0) = 4.0f;
    DepthMap n = normalize_depth(d);
    CHECK(n.at(0, 0, 0) == doctest::Approx(0.25));
    CHECK(n.at(0, 1, 0) == doctest::Approx(0.5));
    CHECK(n.at(0, 2, 0) == doctest::Approx(1.0));
  }
  SUBCASE("all-zero map rejected") {
    CHECK_THROWS(normalize_depth(DepthMap(2, 2, 1, 0.0f)));
  }
}

TEST_CASE("transmission") {
  DepthMap d(2, 2, 1, 1.0f);
  SUBCASE("beta 0 gives t == 1") {
    ImageTensor t = transmission(d, 0.0f);
    for (size_t i = 0; i < t.size(); ++i) CHECK(t.data()[i] == 1.0f);
  }
  SUBCASE("d=1, beta=ln2 gives t=0.5") {
    ImageTensor t = transmission(d, std::log(2.0f));
    for (size_t i = 0; i < t.size(); ++i) CHECK(t.data()[i] == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("zero depth gives t=1 regardless of beta") {
    DepthMap z(2, 2, 1, 0.0f);
    ImageTensor t = transmission(z, 3.7f);
    for (size_t i = 0; i < t.size(); ++i) CHECK(t.data()[i] == 1.0f);
  }
  SUBCASE("negative beta rejected") { CHECK_THROWS(transmission(d, -0.1f)); }
}

TEST_CASE("synthesize_haze") {
  SeededRng rng(31);
  ImageTensor clean = testsupport::random_tensor_f(6, 5, 3, rng);
  DepthMap depth = testsupport::make_depth(6, 5, rng);

  SUBCASE("beta 0 returns the clean image bitwise") {
    ImageTensor hazy = synthesize_haze(clean, depth, AsmParams(1.2f, 0.0f));
    CHECK(hazy.vec() == clean.vec());
  }

  SUBCASE("huge beta approaches the atmospheric light where depth > 0") {
    DepthMap ones(4, 4, 1, 1.0f);
    ImageTensor c(4, 4, 3, 0.3f);
    ImageTensor hazy = synthesize_haze(c, ones, AsmParams(0.9f, 500.0f));
    for (size_t i = 0; i < hazy.size(); ++i)
      CHECK(hazy.data()[i] == doctest::Approx(0.9).epsilon(1e-5));
  }

  SUBCASE("matches the per-pixel reference loop") {
    const AsmParams p(1.0f, std::log(2.0f));
    ImageTensor hazy = synthesize_haze(clean, depth, p);
    for (int y = 0; y < clean.height(); ++y)
      for (int x = 0; x < clean.width(); ++x) {
        const double t = std::exp(-static_cast<double>(p.beta) * depth.at(y, x, 0));
        for (int c = 0; c < 3; ++c) {
          const double want = clean.at(y, x, c) * t + p.atmospheric_light * (1.0 - t);
          CHECK(std::abs(hazy.at(y, x, c) - want) < 1e-6);
        }
      }
    ImageTensor half(1, 1, 1, 0.5f);
    DepthMap one(1, 1, 1, 1.0f);
    ImageTensor v = synthesize_haze(half, one, AsmParams(1.0f, std::log(2.0f)));
    CHECK(v.at(0, 0, 0) == doctest::Approx(0.75).epsilon(1e-6));
  }

  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS(synthesize_haze(clean, DepthMap(3, 3, 1, 0.5f), AsmParams(1.0f, 1.0f)));
  }

  SUBCASE("convex combination bound for A in [0,1]") {
    const AsmParams p(0.85f, 1.4f);
    ImageTensor hazy = synthesize_haze(clean, depth, p);
    float jmin = 1.0f, jmax = 0.0f;
    for (size_t i = 0; i < clean.size(); ++i) {
      jmin = std::min(jmin, clean.data()[i]);
      jmax = std::max(jmax, clean.data()[i]);
    }
    for (size_t i = 0; i < hazy.size(); ++i) {
      CHECK(hazy.data()[i] >= std::min(jmin, p.atmospheric_light) - 1e-6f);
      CHECK(hazy.data()[i] <= std::max(jmax, p.atmospheric_light) + 1e-6f);
    }
  }

  SUBCASE("monotone in beta where J < A") {
    ImageTensor dark(4, 4, 1, 0.2f);
    DepthMap dd = testsupport::make_depth(4, 4, rng);
    ImageTensor h1 = synthesize_haze(dark, dd, AsmParams(0.9f, 0.8f));
    ImageTensor h2 = synthesize_haze(dark, dd, AsmParams(0.9f, 2.0f));
    for (size_t i = 0; i < h1.size(); ++i) CHECK(h2.data()[i] >= h1.data()[i] - 1e-6f);
  }

  SUBCASE("invalid parameters rejected") {
    CHECK_THROWS(AsmParams(0.0f, 1.0f));
    CHECK_THROWS(AsmParams(1.0f, -1.0f));
  }
}
