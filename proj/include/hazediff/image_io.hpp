// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hazediff/tensor.hpp"

namespace hazediff {

/// Reads an 8-bit grayscale or RGB PNG and scales values to [0,1] by /255.
/// Throws std::runtime_error for missing files or other bit depths / color
/// types (palette, alpha, 16-bit).
ImageTensor load_image(const std::string& path);

/// Writes a 1- or 3-channel tensor as an 8-bit PNG. Values are clamped to
/// [0,1] and quantized with round(v*255). Encoder settings are fixed so
/// identical tensors produce byte-identical files.
void save_image(const ImageTensor& img, const std::string& path);

/// Reads a depth map from a grayscale PFM (values passed through) or a
/// 16-bit grayscale PNG (scaled to [0,1]). Negative or non-finite depths
/// are rejected.
DepthMap load_depth(const std::string& path);

/// Writes a single-channel map as a little-endian PFM (scale header -1.0).
void save_pfm(const DepthMap& map, const std::string& path);

} // namespace hazediff
