// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "cwdm/data.hpp"
#include "cwdm/denoiser_config.hpp"
#include "cwdm/metrics.hpp"
#include "cwdm/schedule.hpp"

namespace cwdm {

// The single structured config behind every subcommand. Flags mirror the
// nested keys 1:1 (--train.seed overrides train.seed); unknown keys in a
// config file are rejected, and each run echoes its fully resolved config
// into the output directory so it can be replayed.
struct RunConfig {
  struct Dataset {
    std::filesystem::path root;
    std::string extension = "nii.gz";
    std::map<std::string, std::string> naming;  // suffix -> modality code
  } dataset;

  PreprocessSpec preprocess;

  struct Schedule {
    std::string kind = "linear";
    int timesteps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
  } schedule;

  DenoiserConfig denoiser;

  struct Train {
    std::string target_modality = "FLAIR";
    int64_t iterations = 1'200'000;
    double learning_rate = 1e-5;
    int batch_size = 1;
    int64_t checkpoint_every = 50'000;
    uint64_t seed = 42;
    bool preload = true;
    int torch_threads = 1;
    double ema_decay = 0.0;
    double grad_clip = 0.0;
    int64_t lr_warmup = 0;
  } train;

  struct Sampling {
    uint64_t seed = 7;
    int workers = 1;
    bool preprocess_inputs = true;
    int snapshot_stride = 0;
  } sampling;

  struct Evaluate {
    std::string crop_mode = "full";
    bool preprocess_gt = true;
  } evaluate;

  struct Output {
    std::filesystem::path dir = "out";
  } output;

  /// Swaps in desk-scale defaults: a short schedule with matched terminal
  /// noise level, a small 2-level network, and a 3000-iteration run.
  void apply_toy_preset();

  void validate() const;

  NamingProfile naming_profile() const;
  NoiseSchedule make_noise_schedule() const;
  Modality target_modality() const;
  CropMode crop_mode() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);

  /// Writes the resolved config into `dir` for reproducibility.
  void echo_into(const std::filesystem::path& dir) const;
};

}  // namespace cwdm
