// SPDX-License-Identifier: Apache-2.0
// Equivalence of the dispatched SIMD kernels against the scalar reference:
// elementwise ops must agree bitwise, reductions within accumulation
// tolerance.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "hazediff/rng.hpp"
#include "hazediff/simd/dispatch.hpp"
#include "hazediff/simd/kernels.hpp"

using namespace hazediff;

namespace {

std::vector<float> random_vec(size_t n, SeededRng& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-2.0, 2.0));
  return v;
}

} // namespace

TEST_CASE("active isa is supported") {
  CHECK(simd::isa_supported(simd::active_isa()));
  CHECK(simd::isa_supported(simd::Isa::scalar));
}

TEST_CASE("simd variants match scalar reference") {
  const auto& scalar = kernels::table_for(simd::Isa::scalar);

  for (simd::Isa isa : {simd::Isa::avx2, simd::Isa::neon}) {
    if (!simd::isa_supported(isa)) continue;
    const auto& vec = kernels::table_for(isa);
    CAPTURE(simd::isa_name(isa));

    SeededRng rng(42);
    // ragged lengths exercise both the vector body and the remainder loop
    for (size_t n : {1u, 3u, 7u, 8u, 9u, 31u, 64u, 100u, 1023u}) {
      auto x = random_vec(n, rng);
      auto y = random_vec(n, rng);
      const float a = static_cast<float>(rng.uniform(-1.5, 1.5));
      const float b = static_cast<float>(rng.uniform(-1.5, 1.5));

      SUBCASE("") {} // keep per-length state isolated under CAPTURE
      // axpy: bitwise
      auto y1 = y, y2 = y;
      scalar.axpy(y1.data(), x.data(), a, n);
      vec.axpy(y2.data(), x.data(), a, n);
      CHECK(y1 == y2);

      // axpby: bitwise
      std::vector<float> o1(n), o2(n);
      scalar.axpby(o1.data(), x.data(), a, y.data(), b, n);
      vec.axpby(o2.data(), x.data(), a, y.data(), b, n);
      CHECK(o1 == o2);

      // reductions: tolerance (lane-split accumulation reorders the sum)
      const float d1 = scalar.dot(x.data(), y.data(), n);
      const float d2 = vec.dot(x.data(), y.data(), n);
      CHECK(std::abs(d1 - d2) <= 1e-4f * (1.0f + std::abs(d1)));

      const float s1 = scalar.sum_abs(x.data(), n);
      const float s2 = vec.sum_abs(x.data(), n);
      CHECK(std::abs(s1 - s2) <= 1e-4f * (1.0f + std::abs(s1)));
    }

    // matrix kernels
    for (auto [rows, cols] : {std::pair<size_t, size_t>{3, 7}, {16, 16}, {5, 33}}) {
      auto m = random_vec(rows * cols, rng);
      auto v_in = random_vec(cols, rng);
      auto u_in = random_vec(rows, rng);

      std::vector<float> acc1(rows, 0.5f), acc2(rows, 0.5f);
      scalar.matvec_acc(acc1.data(), m.data(), v_in.data(), rows, cols);
      vec.matvec_acc(acc2.data(), m.data(), v_in.data(), rows, cols);
      for (size_t r = 0; r < rows; ++r)
        CHECK(std::abs(acc1[r] - acc2[r]) <= 1e-4f * (1.0f + std::abs(acc1[r])));

      std::vector<float> t1(cols, 0.25f), t2(cols, 0.25f);
      scalar.matvec_t_acc(t1.data(), m.data(), u_in.data(), rows, cols);
      vec.matvec_t_acc(t2.data(), m.data(), u_in.data(), rows, cols);
      for (size_t cidx = 0; cidx < cols; ++cidx)
        CHECK(std::abs(t1[cidx] - t2[cidx]) <= 1e-4f * (1.0f + std::abs(t1[cidx])));

      auto g1 = m, g2 = m;
      scalar.ger_acc(g1.data(), u_in.data(), v_in.data(), rows, cols);
      vec.ger_acc(g2.data(), u_in.data(), v_in.data(), rows, cols);
      for (size_t i = 0; i < g1.size(); ++i)
        CHECK(std::abs(g1[i] - g2[i]) <= 1e-5f * (1.0f + std::abs(g1[i])));
    }
  }
}

TEST_CASE("force_isa rejects unsupported sets and flips the active table") {
  const simd::Isa original = simd::active_isa();
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  simd::force_isa(original);
  CHECK(simd::active_isa() == original);

#if !defined(__aarch64__)
  CHECK_THROWS(simd::force_isa(simd::Isa::neon));
#endif
}
