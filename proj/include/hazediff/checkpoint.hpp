// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hazediff/config.hpp"
#include "hazediff/toynet.hpp"

namespace hazediff {

/// Checkpoint file layout: 8-byte magic, little-endian u64 JSON header
/// length, the header (config snapshot + img_channels), little-endian u64
/// parameter count, then the parameters as little-endian float32 in
/// for_each_param order.
struct Checkpoint {
  ExperimentConfig config;
  int img_channels = 3;
  ToyEpsNet model;
};

void save_checkpoint(ToyEpsNet& model, const ExperimentConfig& cfg, int img_channels,
                     const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

/// True when two checkpoints describe the same experiment apart from the
/// use_fcb flag (the controlled pairing for the spectral comparison).
bool same_experiment_modulo_fcb(const Checkpoint& a, const Checkpoint& b);

} // namespace hazediff
