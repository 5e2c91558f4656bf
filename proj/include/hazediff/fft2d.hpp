// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace hazediff {

/// Unnormalized forward 2-D DFT of a real h x w plane (row-major, DC at
/// index [0,0]). Backed by FFTW with deterministic (estimate-only) planning.
std::vector<std::complex<double>> fft2d_forward(const std::vector<double>& plane, int h, int w);

/// Inverse 2-D DFT scaled by 1/(h*w), so inverse(forward(x)) == x.
std::vector<std::complex<double>> fft2d_inverse(const std::vector<std::complex<double>>& spec,
                                                int h, int w);

/// Moves DC to (h/2, w/2); shift_back undoes it (they differ for odd sizes).
std::vector<std::complex<double>> fftshift(const std::vector<std::complex<double>>& spec, int h,
                                           int w);
std::vector<std::complex<double>> fftshift_back(const std::vector<std::complex<double>>& spec,
                                                int h, int w);

} // namespace hazediff
