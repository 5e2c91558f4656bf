// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hazediff/fcb.hpp"
#include "hazediff/haze_aug.hpp"
#include "hazediff/toynet.hpp"

namespace hazediff {

/// Full experiment configuration; defaults reproduce the documented
/// reference values (schedule T = 2000, bank k {3,5,7} / sigma {1,2,4},
/// widened augmentation ranges).
struct ExperimentConfig {
  // schedule
  int schedule_steps = 2000;
  double beta_start = 1e-6;
  double beta_end = 1e-2;

  TrainConfig train;

  HazeAugConfig aug;
  uint64_t aug_seed = 0;

  // filter bank / skips
  std::vector<int> fcb_ks = {3, 5, 7};
  std::vector<float> fcb_sigmas = {1.0f, 2.0f, 4.0f};
  float gamma_sigma = 1.0f;
  bool use_fcb = true;

  // io
  std::string dataset_dir = ".";
  std::string out_dir = ".";

  std::vector<GaussianSpec> fcb_specs() const;
  NoiseSchedule schedule() const;
  ToyNetConfig net_config(int img_channels) const;
};

/// Parses and validates a config document. Unknown keys anywhere are
/// rejected (ConfigError).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

} // namespace hazediff
