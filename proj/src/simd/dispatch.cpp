// SPDX-License-Identifier: Apache-2.0
#include "hazediff/simd/dispatch.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "tables.hpp"

namespace hazediff {

namespace simd {

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if HAZEDIFF_X86 && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
      return HAZEDIFF_ARM64 != 0; // advanced SIMD is baseline on aarch64
  }
  return false;
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("HAZEDIFF_SIMD")) {
    std::string want(env);
    Isa isa;
    if (want == "scalar") isa = Isa::scalar;
    else if (want == "avx2") isa = Isa::avx2;
    else if (want == "neon") isa = Isa::neon;
    else throw std::invalid_argument("HAZEDIFF_SIMD: unknown value '" + want + "'");
    if (!isa_supported(isa))
      throw std::invalid_argument(std::string("HAZEDIFF_SIMD: '") + want +
                                  "' not supported on this machine");
    return isa;
  }
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa g_active = Isa::scalar;
bool g_initialized = false;

void ensure_initialized() {
  if (!g_initialized) {
    g_active = detect();
    g_initialized = true;
  }
}

} // namespace

Isa active_isa() {
  ensure_initialized();
  return g_active;
}

void force_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument(std::string("force_isa: ") + isa_name(isa) +
                                " not supported on this machine");
  g_active = isa;
  g_initialized = true;
}

} // namespace simd

namespace kernels {

const TableF& table_for(simd::Isa isa) {
  static TableF scalar = [] {
    TableF t;
    detail::fill_scalar(t);
    return t;
  }();
  switch (isa) {
    case simd::Isa::scalar:
      return scalar;
    case simd::Isa::avx2: {
#if HAZEDIFF_X86
      if (simd::isa_supported(simd::Isa::avx2)) {
        static TableF avx2 = [] {
          TableF t;
          detail::fill_avx2(t);
          return t;
        }();
        return avx2;
      }
#endif
      break;
    }
    case simd::Isa::neon: {
#if HAZEDIFF_ARM64
      static TableF neon = [] {
        TableF t;
        detail::fill_neon(t);
        return t;
      }();
      return neon;
#else
      break;
#endif
    }
  }
  throw std::invalid_argument(std::string("kernel table: ") + simd::isa_name(isa) +
                              " not available in this build");
}

const TableF& active_table() { return table_for(simd::active_isa()); }

} // namespace kernels

} // namespace hazediff
