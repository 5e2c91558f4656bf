// SPDX-License-Identifier: Apache-2.0
#include "hazediff/config.hpp"

#include <fstream>
#include <set>

#include "hazediff/errors.hpp"

namespace hazediff {

using nlohmann::json;

std::vector<GaussianSpec> ExperimentConfig::fcb_specs() const {
  if (fcb_ks.size() != fcb_sigmas.size() || fcb_ks.empty())
    throw ConfigError("fcb: ks and sigmas must be non-empty and the same length");
  std::vector<GaussianSpec> specs;
  specs.reserve(fcb_ks.size());
  for (size_t i = 0; i < fcb_ks.size(); ++i) specs.push_back({fcb_ks[i], fcb_sigmas[i]});
  return specs;
}

NoiseSchedule ExperimentConfig::schedule() const {
  return make_schedule(schedule_steps, beta_start, beta_end);
}

ToyNetConfig ExperimentConfig::net_config(int img_channels) const {
  ToyNetConfig net;
  net.img_channels = img_channels;
  net.use_fcb = use_fcb;
  net.fcb_specs = fcb_specs();
  net.gamma_sigma = gamma_sigma;
  return net;
}

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

} // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "top level", {"schedule", "train", "aug", "fcb", "io"});
  ExperimentConfig cfg;

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    check_keys(s, "schedule", {"T", "beta_start", "beta_end"});
    read(s, "T", cfg.schedule_steps);
    read(s, "beta_start", cfg.beta_start);
    read(s, "beta_end", cfg.beta_end);
  }

  bool train_use_fcb_set = false;
  bool train_use_fcb = cfg.train.use_fcb;
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, "train",
               {"iters", "lr", "lr_decay", "decay_every", "batch", "crop", "seed", "use_fcb"});
    read(t, "iters", cfg.train.iters);
    read(t, "lr", cfg.train.lr);
    read(t, "lr_decay", cfg.train.lr_decay);
    read(t, "decay_every", cfg.train.decay_every);
    read(t, "batch", cfg.train.batch);
    read(t, "crop", cfg.train.crop);
    read(t, "seed", cfg.train.seed);
    if (t.contains("use_fcb")) {
      read(t, "use_fcb", train_use_fcb);
      train_use_fcb_set = true;
    }
  }

  if (j.contains("aug")) {
    const json& a = j.at("aug");
    check_keys(a, "aug",
               {"a_min", "a_max", "beta_min", "beta_max", "delta_min", "delta_max", "smooth_k",
                "smooth_sigma", "seed"});
    read(a, "a_min", cfg.aug.a_min);
    read(a, "a_max", cfg.aug.a_max);
    read(a, "beta_min", cfg.aug.beta_min);
    read(a, "beta_max", cfg.aug.beta_max);
    read(a, "delta_min", cfg.aug.delta_min);
    read(a, "delta_max", cfg.aug.delta_max);
    read(a, "smooth_k", cfg.aug.smooth_k);
    read(a, "smooth_sigma", cfg.aug.smooth_sigma);
    read(a, "seed", cfg.aug_seed);
  }

  if (j.contains("fcb")) {
    const json& f = j.at("fcb");
    check_keys(f, "fcb", {"ks", "sigmas", "gamma_sigma", "use_fcb"});
    read(f, "ks", cfg.fcb_ks);
    read(f, "sigmas", cfg.fcb_sigmas);
    read(f, "gamma_sigma", cfg.gamma_sigma);
    read(f, "use_fcb", cfg.use_fcb);
    if (train_use_fcb_set && train_use_fcb != cfg.use_fcb)
      throw ConfigError("config: train.use_fcb and fcb.use_fcb disagree");
  } else if (train_use_fcb_set) {
    cfg.use_fcb = train_use_fcb;
  }
  cfg.train.use_fcb = cfg.use_fcb;

  if (j.contains("io")) {
    const json& io = j.at("io");
    check_keys(io, "io", {"dataset_dir", "out_dir"});
    read(io, "dataset_dir", cfg.dataset_dir);
    read(io, "out_dir", cfg.out_dir);
  }

  // structural checks that do not depend on the command
  if (cfg.schedule_steps < 1) throw ConfigError("config: schedule.T must be >= 1");
  if (!(cfg.beta_start > 0.0) || !(cfg.beta_end < 1.0) || cfg.beta_start > cfg.beta_end)
    throw ConfigError("config: need 0 < beta_start <= beta_end < 1");
  if (!(cfg.gamma_sigma > 0.0f)) throw ConfigError("config: fcb.gamma_sigma must be > 0");
  cfg.fcb_specs(); // length check
  for (int k : cfg.fcb_ks)
    if (k < 1 || k % 2 == 0) throw ConfigError("config: fcb.ks entries must be odd and >= 1");
  for (float s : cfg.fcb_sigmas)
    if (!(s > 0.0f)) throw ConfigError("config: fcb.sigmas entries must be > 0");
  try {
    cfg.train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schedule"] = {{"T", cfg.schedule_steps},
                   {"beta_start", cfg.beta_start},
                   {"beta_end", cfg.beta_end}};
  j["train"] = {{"iters", cfg.train.iters},     {"lr", cfg.train.lr},
                {"lr_decay", cfg.train.lr_decay}, {"decay_every", cfg.train.decay_every},
                {"batch", cfg.train.batch},     {"crop", cfg.train.crop},
                {"seed", cfg.train.seed},       {"use_fcb", cfg.train.use_fcb}};
  j["aug"] = {{"a_min", cfg.aug.a_min},           {"a_max", cfg.aug.a_max},
              {"beta_min", cfg.aug.beta_min},     {"beta_max", cfg.aug.beta_max},
              {"delta_min", cfg.aug.delta_min},   {"delta_max", cfg.aug.delta_max},
              {"smooth_k", cfg.aug.smooth_k},     {"smooth_sigma", cfg.aug.smooth_sigma},
              {"seed", cfg.aug_seed}};
  j["fcb"] = {{"ks", cfg.fcb_ks},
              {"sigmas", cfg.fcb_sigmas},
              {"gamma_sigma", cfg.gamma_sigma},
              {"use_fcb", cfg.use_fcb}};
  j["io"] = {{"dataset_dir", cfg.dataset_dir}, {"out_dir", cfg.out_dir}};
  return j;
}

} // namespace hazediff
