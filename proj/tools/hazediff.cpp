// SPDX-License-Identifier: Apache-2.0
// Command-line front end: haze synthesis, augmentation, training, sampling,
// spectral diagnostics, and reference metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hazediff/checkpoint.hpp"
#include "hazediff/config.hpp"
#include "hazediff/diffusion.hpp"
#include "hazediff/errors.hpp"
#include "hazediff/fcb.hpp"
#include "hazediff/haze_aug.hpp"
#include "hazediff/haze_synth.hpp"
#include "hazediff/image_io.hpp"
#include "hazediff/metrics.hpp"
#include "hazediff/spectral.hpp"
#include "hazediff/toynet.hpp"

namespace fs = std::filesystem;
using namespace hazediff;

namespace {

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad integer list entry: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

void check_finite(const ImageTensor& img, const std::string& what) {
  for (size_t i = 0; i < img.size(); ++i)
    if (!std::isfinite(img.data()[i])) throw NumericError(what + ": non-finite value detected");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

struct NamedPair {
  std::string stem;
  SyntheticPair pair;
};

DepthMap load_depth_for_stem(const fs::path& depth_dir, const std::string& stem) {
  const fs::path pfm = depth_dir / (stem + ".pfm");
  const fs::path png = depth_dir / (stem + ".png");
  if (fs::exists(pfm)) return load_depth(pfm.string());
  if (fs::exists(png)) return load_depth(png.string());
  throw DataError("no depth file for stem '" + stem + "' in " + depth_dir.string());
}

std::vector<std::string> stems_from_dir(const fs::path& clean_dir) {
  if (!fs::is_directory(clean_dir)) throw DataError("no such directory: " + clean_dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(clean_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw DataError("no PNG files in " + clean_dir.string());
  return stems;
}

std::vector<std::string> stems_from_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("missing manifest: " + manifest.string());
  std::vector<std::string> stems;
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    stems.push_back(line.substr(0, line.find(',')));
  }
  if (stems.empty()) throw DataError("empty manifest: " + manifest.string());
  return stems;
}

/// Loads clean/STEM.png, depth/STEM.{pfm,png} and (optionally)
/// hazy/STEM.png triplets; depth is normalized on load.
std::vector<NamedPair> load_dataset(const fs::path& dir, const std::vector<std::string>& stems,
                                    bool need_hazy) {
  std::vector<NamedPair> out;
  out.reserve(stems.size());
  for (const auto& stem : stems) {
    NamedPair np;
    np.stem = stem;
    const fs::path clean_path = dir / "clean" / (stem + ".png");
    if (!fs::exists(clean_path)) throw DataError("missing clean image: " + clean_path.string());
    np.pair.clean = load_image(clean_path.string());
    np.pair.depth = normalize_depth(load_depth_for_stem(dir / "depth", stem));
    if (np.pair.depth.height() != np.pair.clean.height() ||
        np.pair.depth.width() != np.pair.clean.width())
      throw DataError("depth/clean size mismatch for stem '" + stem + "'");
    if (need_hazy) {
      const fs::path hazy_path = dir / "hazy" / (stem + ".png");
      if (!fs::exists(hazy_path)) throw DataError("missing hazy image: " + hazy_path.string());
      np.pair.hazy = load_image(hazy_path.string());
      if (!np.pair.hazy.same_shape(np.pair.clean))
        throw DataError("hazy/clean size mismatch for stem '" + stem + "'");
    }
    out.push_back(std::move(np));
  }
  return out;
}

std::vector<SyntheticPair> strip_names(const std::vector<NamedPair>& named) {
  std::vector<SyntheticPair> pairs;
  pairs.reserve(named.size());
  for (const auto& np : named) pairs.push_back(np.pair);
  return pairs;
}

// ---------------------------------------------------------------------------

void cmd_synth(const ExperimentConfig& cfg, const fs::path& clean_dir, const fs::path& depth_dir,
               const fs::path& out_dir, uint64_t seed) {
  // relaxed range check: synthesis permits degenerate (equal-bound) ranges
  if (!(cfg.aug.a_min > 0.0f) || cfg.aug.a_min > cfg.aug.a_max)
    throw ConfigError("synth: need 0 < a_min <= a_max");
  if (!(cfg.aug.beta_min >= 0.0f) || cfg.aug.beta_min > cfg.aug.beta_max)
    throw ConfigError("synth: need 0 <= beta_min <= beta_max");

  const auto stems = stems_from_dir(clean_dir);
  fs::create_directories(out_dir / "hazy");

  SeededRng rng(seed);
  std::ofstream manifest = open_output(out_dir / "manifest.csv");
  manifest << "file,A,beta,seed\n";
  for (const auto& stem : stems) {
    ImageTensor clean = load_image((clean_dir / (stem + ".png")).string());
    DepthMap depth = normalize_depth(load_depth_for_stem(depth_dir, stem));
    if (depth.height() != clean.height() || depth.width() != clean.width())
      throw DataError("depth/clean size mismatch for stem '" + stem + "'");
    const float a = static_cast<float>(rng.uniform(cfg.aug.a_min, cfg.aug.a_max));
    const float beta = static_cast<float>(rng.uniform(cfg.aug.beta_min, cfg.aug.beta_max));
    ImageTensor hazy = synthesize_haze(clean, depth, AsmParams(a, beta));
    check_finite(hazy, "synth");
    save_image(hazy, (out_dir / "hazy" / (stem + ".png")).string());
    manifest << stem << "," << fmt(a, "%.9g") << "," << fmt(beta, "%.9g") << "," << seed << "\n";
  }
}

struct ReplayRow {
  std::string stem;
  AugRecord record;
};

std::vector<ReplayRow> parse_aug_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing replay manifest: " + path.string());
  std::vector<ReplayRow> rows;
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string stem, branch, a, beta, delta, donor;
    std::getline(ss, stem, ',');
    std::getline(ss, branch, ',');
    std::getline(ss, a, ',');
    std::getline(ss, beta, ',');
    std::getline(ss, delta, ',');
    std::getline(ss, donor, ',');
    ReplayRow row;
    row.stem = stem;
    if (branch == "hard") {
      row.record.branch = AugRecord::Branch::hard;
      row.record.atmospheric_light = std::stof(a);
      row.record.beta = std::stof(beta);
    } else if (branch == "migrate") {
      row.record.branch = AugRecord::Branch::migrate;
      row.record.delta = std::stod(delta);
      row.record.donor = std::stoul(donor);
    } else {
      throw DataError("bad branch '" + branch + "' in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void cmd_augment(const ExperimentConfig& cfg, const fs::path& dataset_dir, const fs::path& out_dir,
                 uint64_t seed, const std::string& replay_path) {
  cfg.aug.validate();
  const auto stems = stems_from_manifest(dataset_dir / "manifest.csv");
  const auto named = load_dataset(dataset_dir, stems, /*need_hazy=*/true);
  const auto pairs = strip_names(named);

  fs::create_directories(out_dir / "aug");
  std::ofstream manifest = open_output(out_dir / "manifest.csv");
  manifest << "file,branch,A,beta,delta,donor\n";

  auto emit = [&](const std::string& stem, const AugRecord& rec, const ImageTensor& img) {
    check_finite(img, "augment");
    save_image(img, (out_dir / "aug" / (stem + ".png")).string());
    if (rec.branch == AugRecord::Branch::hard)
      manifest << stem << ",hard," << fmt(rec.atmospheric_light, "%.9g") << ","
               << fmt(rec.beta, "%.9g") << ",,\n";
    else
      manifest << stem << ",migrate,,," << fmt(rec.delta, "%.17g") << "," << rec.donor << "\n";
  };

  if (!replay_path.empty()) {
    const auto rows = parse_aug_manifest(replay_path);
    for (const auto& row : rows) {
      const auto it = std::find_if(named.begin(), named.end(),
                                   [&](const NamedPair& np) { return np.stem == row.stem; });
      if (it == named.end()) throw DataError("replay stem not in dataset: " + row.stem);
      const size_t idx = static_cast<size_t>(it - named.begin());
      emit(row.stem, row.record, replay_aug(idx, pairs, row.record, cfg.aug));
    }
    return;
  }

  SeededRng rng(seed);
  for (size_t i = 0; i < named.size(); ++i) {
    AugRecord rec;
    ImageTensor img = haze_aug(i, pairs, rng, cfg.aug, &rec);
    emit(named[i].stem, rec, img);
  }
}

void cmd_train(const ExperimentConfig& cfg, const fs::path& dataset_dir, const fs::path& out_dir,
               bool with_aug) {
  if (with_aug) cfg.aug.validate();
  const auto stems = fs::exists(dataset_dir / "manifest.csv")
                         ? stems_from_manifest(dataset_dir / "manifest.csv")
                         : stems_from_dir(dataset_dir / "clean");
  const auto named = load_dataset(dataset_dir, stems, /*need_hazy=*/true);
  const auto pairs = strip_names(named);
  const int channels = pairs.front().clean.channels();

  fs::create_directories(out_dir);
  TrainResult result = train(pairs, cfg.train, cfg.schedule(), with_aug ? &cfg.aug : nullptr,
                             cfg.net_config(channels));

  std::ofstream curve = open_output(out_dir / "loss.csv");
  curve << "iteration,loss\n";
  for (const auto& [it, loss] : result.loss_curve)
    curve << it << "," << fmt(loss, "%.9g") << "\n";

  save_checkpoint(result.model, cfg, channels, (out_dir / "checkpoint.bin").string());
}

void cmd_sample(const std::string& ckpt_path, const std::string& input_path,
                const fs::path& out_dir, int steps, int avg, uint64_t seed, int resize) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  ImageTensor hazy = load_image(input_path);
  if (hazy.channels() != ck.img_channels)
    throw DataError("sample: input channel count does not match the checkpoint");
  if (resize > 0) hazy = resize_bilinear(hazy, resize, resize);
  const int div = 1 << ck.config.net_config(ck.img_channels).levels;
  if (hazy.height() % div != 0 || hazy.width() % div != 0)
    throw DataError("sample: input size must be divisible by " + std::to_string(div) +
                    " (use --resize)");

  SeededRng rng(seed);
  ImageTensor out = ddim_sample<float>(ck.model, hazy, ck.config.schedule(), steps, rng, avg);
  check_finite(out, "sample");
  fs::create_directories(out_dir);
  save_image(out, (out_dir / "dehazed.png").string());
}

void cmd_psd(const std::string& image_path, int bins, const fs::path& out_dir) {
  ImageTensor img = load_image(image_path);
  if (bins <= 0) bins = std::min(img.height(), img.width()) / 2;
  RadialPSD curve = radial_psd(img, bins);
  fs::create_directories(out_dir);
  std::ofstream out = open_output(out_dir / "psd.csv");
  out << "frequency,power\n";
  for (int i = 0; i < curve.bins(); ++i)
    out << fmt(curve.freq[i], "%.9g") << "," << fmt(curve.power[i]) << "\n";
}

void cmd_psd_compare(const std::string& a_path, const std::string& b_path, int bins) {
  ImageTensor a = load_image(a_path);
  ImageTensor b = load_image(b_path);
  if (bins <= 0)
    bins = std::min({a.height(), a.width(), b.height(), b.width()}) / 2;
  const double kl = psd_kl(radial_psd(a, bins), radial_psd(b, bins));
  if (!std::isfinite(kl)) throw NumericError("psd: KL is not finite");
  std::cout << fmt(kl) << "\n";
}

void cmd_freq_response(const ExperimentConfig& cfg, int n_freq, const fs::path& out_dir) {
  FilterBank<float> bank = build_filter_bank<float>(cfg.fcb_specs(), cfg.gamma_sigma);
  FrequencyResponse fr = frequency_response(bank, n_freq);
  fs::create_directories(out_dir);
  std::ofstream out = open_output(out_dir / "freq_response.csv");
  out << "frequency";
  for (int b = 0; b < bank.branch_count(); ++b) out << ",branch_" << b;
  out << "\n";
  for (size_t i = 0; i < fr.freq.size(); ++i) {
    out << fmt(fr.freq[i], "%.9g");
    for (int b = 0; b < bank.branch_count(); ++b) out << "," << fmt(fr.response[b][i]);
    out << "\n";
  }
}

void cmd_metrics(const std::string& a_path, const std::string& b_path) {
  ImageTensor a = load_image(a_path);
  ImageTensor b = load_image(b_path);
  MetricReport rep = compute_metrics(a, b);
  nlohmann::json j = {{"psnr", rep.psnr}, {"ssim", rep.ssim}, {"ciede", rep.ciede}};
  std::cout << j.dump() << "\n";
}

void cmd_spectral_exp(const std::string& ckpt_fcb, const std::string& ckpt_plain,
                      const fs::path& dataset_dir, const std::vector<int>& t_list,
                      const fs::path& out_dir, uint64_t seed) {
  Checkpoint fcb = load_checkpoint(ckpt_fcb);
  Checkpoint plain = load_checkpoint(ckpt_plain);
  if (!fcb.config.use_fcb || plain.config.use_fcb)
    throw ConfigError("spectral-exp: expected one use_fcb=true and one use_fcb=false checkpoint");
  if (!same_experiment_modulo_fcb(fcb, plain))
    throw ConfigError("spectral-exp: checkpoint configs differ beyond use_fcb");

  const auto stems = fs::exists(dataset_dir / "manifest.csv")
                         ? stems_from_manifest(dataset_dir / "manifest.csv")
                         : stems_from_dir(dataset_dir / "clean");
  const auto pairs = strip_names(load_dataset(dataset_dir, stems, /*need_hazy=*/true));

  const NoiseSchedule sched = fcb.config.schedule();
  fs::create_directories(out_dir);
  std::ofstream out = open_output(out_dir / "spectral_kl.csv");
  out << "t,kl_plain,kl_fcb\n";

  for (int t : t_list) {
    if (t < 1 || t > sched.steps) throw ConfigError("spectral-exp: t out of schedule range");
    SeededRng rng(seed + static_cast<uint64_t>(t));
    double kl_plain_sum = 0.0, kl_fcb_sum = 0.0;
    for (const auto& pair : pairs) {
      ImageTensor cond = to_model_range(pair.hazy);
      ImageTensor clean = to_model_range(pair.clean);
      ImageTensor eps = randn<float>(clean.height(), clean.width(), clean.channels(), rng);
      ImageTensor noisy = forward_diffuse(clean, t, eps, sched);
      const int bins = std::min(clean.height(), clean.width()) / 2;
      const RadialPSD flat = flat_reference(bins);
      // identical (eps, noisy) inputs keep the two models directly comparable
      ImageTensor pred_plain = plain.model.predict(cond, noisy, sched.gamma_at(t));
      ImageTensor pred_fcb = fcb.model.predict(cond, noisy, sched.gamma_at(t));
      kl_plain_sum += psd_kl(radial_psd(pred_plain, bins), flat);
      kl_fcb_sum += psd_kl(radial_psd(pred_fcb, bins), flat);
    }
    const double kp = kl_plain_sum / pairs.size();
    const double kf = kl_fcb_sum / pairs.size();
    if (!std::isfinite(kp) || !std::isfinite(kf))
      throw NumericError("spectral-exp: KL is not finite");
    out << t << "," << fmt(kp) << "," << fmt(kf) << "\n";
  }
}

void cmd_ddim_sweep(const std::string& ckpt_path, const fs::path& dataset_dir,
                    const std::vector<int>& steps_list, int avg, const fs::path& out_dir,
                    uint64_t seed) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  const NoiseSchedule sched = ck.config.schedule();
  for (int s : steps_list)
    if (s < 1 || s > sched.steps) throw ConfigError("ddim-sweep: steps out of range");

  const auto stems = fs::exists(dataset_dir / "manifest.csv")
                         ? stems_from_manifest(dataset_dir / "manifest.csv")
                         : stems_from_dir(dataset_dir / "clean");
  const auto pairs = strip_names(load_dataset(dataset_dir, stems, /*need_hazy=*/true));

  fs::create_directories(out_dir);
  std::ofstream out = open_output(out_dir / "ddim_sweep.csv");
  out << "steps,psnr,ssim\n";
  for (int steps : steps_list) {
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      SeededRng rng(seed + 1000003ULL * i);
      ImageTensor dehazed = ddim_sample<float>(ck.model, pairs[i].hazy, sched, steps, rng, avg);
      check_finite(dehazed, "ddim-sweep");
      psnr_sum += psnr(dehazed, pairs[i].clean);
      ssim_sum += ssim(dehazed, pairs[i].clean);
    }
    out << steps << "," << fmt(psnr_sum / pairs.size()) << "," << fmt(ssim_sum / pairs.size())
        << "\n";
  }
}

void cmd_export_weights(const std::string& ckpt_path, const fs::path& out_dir) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  const auto rows = export_weights(ck.model);
  fs::create_directories(out_dir);
  std::ofstream out = open_output(out_dir / "fcb_weights.csv");
  const int nb = rows.empty() ? 0 : static_cast<int>(rows.front().second.size());
  out << "layer";
  for (int j = 1; j <= nb; ++j) out << ",w" << j;
  out << "\n";
  for (const auto& [layer, w] : rows) {
    out << layer;
    for (float v : w) {
      if (!std::isfinite(v)) throw NumericError("export-weights: non-finite weight");
      out << "," << fmt(v, "%.9g");
    }
    out << "\n";
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dehazing diffusion toolkit: scattering-model synthesis, frequency-domain "
               "augmentation, filter-bank skip connections, and spectral diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".";
  uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--seed", seed, "master RNG seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_dir, "output directory");

  // synth
  auto* synth = app.add_subcommand("synth", "scattering-model haze synthesis");
  std::string clean_dir, depth_dir;
  synth->add_option("--clean", clean_dir, "directory of clean PNGs")->required();
  synth->add_option("--depth", depth_dir, "directory of depth maps (PFM or 16-bit PNG)")
      ->required();

  // augment
  auto* augment = app.add_subcommand("augment", "hard-sample / haze-migration augmentation");
  std::string dataset_dir, replay_path;
  augment->add_option("--dataset", dataset_dir, "dataset directory (clean/depth/hazy + manifest)")
      ->required();
  augment->add_option("--replay", replay_path, "replay a previous augmentation manifest");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the noise-prediction net");
  std::string train_dataset;
  bool train_aug = false;
  train_cmd->add_option("--dataset", train_dataset, "dataset directory")->required();
  train_cmd->add_flag("--aug", train_aug, "re-synthesize hazy inputs each iteration");

  // sample
  auto* sample = app.add_subcommand("sample", "dehaze an image by reverse sampling");
  std::string ckpt_path, input_path;
  int sample_steps = 20, sample_avg = 5, sample_resize = 0;
  sample->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  sample->add_option("--input", input_path, "hazy input PNG")->required();
  sample->add_option("--steps", sample_steps, "sampling steps (default 20)");
  sample->add_option("--avg", sample_avg, "independent chains to average (default 5)");
  sample->add_option("--resize", sample_resize, "bilinear-resize input to N x N first");

  // psd
  auto* psd_cmd = app.add_subcommand("psd", "radially averaged power spectral density");
  std::string psd_image;
  std::vector<std::string> psd_compare;
  int psd_bins = 0;
  psd_cmd->add_option("image", psd_image, "input PNG");
  psd_cmd->add_option("--compare", psd_compare, "two images: print KL distance of their PSDs")
      ->expected(2);
  psd_cmd->add_option("--bins", psd_bins, "annulus count (default floor(min(H,W)/2))");

  // freq-response
  auto* freq = app.add_subcommand("freq-response", "filter-bank branch response curves");
  int n_freq = 64;
  freq->add_option("--n-freq", n_freq, "frequency samples over [0, 0.5]");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR / SSIM / CIEDE2000 between two images");
  std::string metrics_a, metrics_b;
  metrics_cmd->add_option("a", metrics_a, "first image")->required();
  metrics_cmd->add_option("b", metrics_b, "second image")->required();

  // spectral-exp
  auto* spectral = app.add_subcommand(
      "spectral-exp", "KL-to-flat of noise predictions, filter-bank model vs plain");
  std::string ckpt_fcb, ckpt_plain, t_list_str = "1,15,1500", spectral_dataset;
  spectral->add_option("--ckpt-fcb", ckpt_fcb, "checkpoint trained with use_fcb=true")->required();
  spectral->add_option("--ckpt-plain", ckpt_plain, "checkpoint trained with use_fcb=false")
      ->required();
  spectral->add_option("--dataset", spectral_dataset, "evaluation dataset directory")->required();
  spectral->add_option("--t", t_list_str, "comma-separated diffusion steps (default 1,15,1500)");

  // ddim-sweep
  auto* sweep = app.add_subcommand("ddim-sweep", "PSNR/SSIM across sampling step counts");
  std::string sweep_ckpt, sweep_dataset, sweep_steps_str = "1,2,5,10,20,50";
  int sweep_avg = 5;
  sweep->add_option("--checkpoint", sweep_ckpt, "model checkpoint")->required();
  sweep->add_option("--dataset", sweep_dataset, "evaluation dataset directory")->required();
  sweep->add_option("--steps", sweep_steps_str, "comma-separated step counts");
  sweep->add_option("--avg", sweep_avg, "chains to average per sample");

  // export-weights
  auto* exportw = app.add_subcommand("export-weights", "dump per-block trainable weights as CSV");
  std::string export_ckpt;
  exportw->add_option("--checkpoint", export_ckpt, "model checkpoint")->required();

  try {
    app.parse(argc, argv);

    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);

    if (*synth) {
      cmd_synth(cfg, clean_dir, depth_dir, out_dir, seed_given ? seed : cfg.aug_seed);
    } else if (*augment) {
      cmd_augment(cfg, dataset_dir, out_dir, seed_given ? seed : cfg.aug_seed, replay_path);
    } else if (*train_cmd) {
      if (seed_given) cfg.train.seed = seed;
      cmd_train(cfg, train_dataset, out_dir, train_aug);
    } else if (*sample) {
      if (sample_steps < 1) throw ConfigError("sample: steps must be >= 1");
      if (sample_avg < 1) throw ConfigError("sample: avg must be >= 1");
      cmd_sample(ckpt_path, input_path, out_dir, sample_steps, sample_avg, seed, sample_resize);
    } else if (*psd_cmd) {
      if (!psd_compare.empty()) cmd_psd_compare(psd_compare[0], psd_compare[1], psd_bins);
      else if (!psd_image.empty()) cmd_psd(psd_image, psd_bins, out_dir);
      else throw ConfigError("psd: give an image or --compare A B");
    } else if (*freq) {
      if (n_freq < 2) throw ConfigError("freq-response: n-freq must be >= 2");
      cmd_freq_response(cfg, n_freq, out_dir);
    } else if (*metrics_cmd) {
      cmd_metrics(metrics_a, metrics_b);
    } else if (*spectral) {
      cmd_spectral_exp(ckpt_fcb, ckpt_plain, spectral_dataset, parse_int_list(t_list_str), out_dir,
                       seed);
    } else if (*sweep) {
      if (sweep_avg < 1) throw ConfigError("ddim-sweep: avg must be >= 1");
      cmd_ddim_sweep(sweep_ckpt, sweep_dataset, parse_int_list(sweep_steps_str), sweep_avg,
                     out_dir, seed);
    } else if (*exportw) {
      cmd_export_weights(export_ckpt, out_dir);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
