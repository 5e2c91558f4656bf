// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hazediff/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HAZEDIFF_X86 1
#else
#define HAZEDIFF_X86 0
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define HAZEDIFF_ARM64 1
#else
#define HAZEDIFF_ARM64 0
#endif

namespace hazediff::kernels::detail {

void fill_scalar(TableF& t);

#if HAZEDIFF_X86
void fill_avx2(TableF& t); // defined in kernels_avx2.cpp (x86 builds only)
#endif

#if HAZEDIFF_ARM64
void fill_neon(TableF& t); // defined in kernels_neon.cpp (arm64 builds only)
#endif

} // namespace hazediff::kernels::detail
