// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace hazediff::simd {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);

/// True if this build carries kernels for `isa` and the CPU can run them.
bool isa_supported(Isa isa);

/// The instruction set the dispatched kernels currently use. Detected once
/// (best supported wins); HAZEDIFF_SIMD=scalar|avx2|neon overrides.
Isa active_isa();

/// Repoint the kernel table, e.g. to cross-check variants in tests.
/// Throws std::invalid_argument if `isa` is not supported here.
void force_isa(Isa isa);

} // namespace hazediff::simd
