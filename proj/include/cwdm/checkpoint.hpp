// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cwdm/data.hpp"
#include "cwdm/denoiser.hpp"
#include "cwdm/schedule.hpp"

namespace cwdm {

inline constexpr int kCheckpointFormatVersion = 1;

// Everything needed to reuse or resume a training run: the architecture, the
// diffusion schedule, the conditioning order, preprocessing, optimizer
// constants, and the named RNG stream states. Samplers replay the condition
// order and schedule from here rather than recomputing them, so a
// train/sample mismatch cannot happen.
struct CheckpointMeta {
  int format_version = kCheckpointFormatVersion;
  Modality target = Modality::FLAIR;
  std::vector<Modality> condition_order;
  ScheduleKind schedule_kind = ScheduleKind::linear;
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  DenoiserConfig denoiser;
  PreprocessSpec preprocess;
  int64_t iteration = 0;
  uint64_t seed = 0;
  double learning_rate = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::map<std::string, std::string> rng_states;

  NoiseSchedule make_noise_schedule() const {
    return make_schedule(schedule_kind, timesteps, beta_start, beta_end);
  }
};

std::string meta_to_json(const CheckpointMeta& meta);
CheckpointMeta meta_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta,
                     const DenoiserNet& net, torch::optim::Adam* optimizer = nullptr,
                     const DenoiserNet* ema_net = nullptr);

struct LoadedCheckpoint {
  CheckpointMeta meta;
  DenoiserNet net{nullptr};
  DenoiserNet ema_net{nullptr};  // present only when trained with EMA enabled
  bool has_optimizer_state = false;

  /// Weights to sample with: EMA when available, raw otherwise.
  DenoiserNet& sampling_net() { return ema_net ? ema_net : net; }
};

/// Loads metadata and weights; refuses other format versions.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Restores Adam moments saved alongside the weights. The optimizer must
/// already be constructed over the loaded network's parameters.
void load_optimizer_state(const std::filesystem::path& path, torch::optim::Adam& optimizer);

std::string file_sha256(const std::filesystem::path& path);

}  // namespace cwdm
