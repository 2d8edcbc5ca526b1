// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cwdm/checkpoint.hpp"
#include "cwdm/data.hpp"
#include "cwdm/denoiser_config.hpp"
#include "cwdm/sampler.hpp"
#include "cwdm/schedule.hpp"

namespace cwdm {

struct TrainConfig {
  Modality target = Modality::FLAIR;
  int64_t iterations = 1'200'000;
  double learning_rate = 1e-5;
  int batch_size = 1;

  ScheduleKind schedule_kind = ScheduleKind::linear;
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  DenoiserConfig denoiser;
  PreprocessSpec preprocess;

  int64_t checkpoint_every = 50'000;
  uint64_t seed = 42;
  std::filesystem::path dataset_root;
  NamingProfile naming = default_naming_profile();
  std::filesystem::path out_dir;

  /// Keep every subject's wavelet coefficients in memory. Right for toy
  /// datasets; full-size datasets stream from disk instead.
  bool preload = true;
  int torch_threads = 1;

  // Experimentation handles; all off by default.
  double ema_decay = 0.0;
  double grad_clip = 0.0;
  int64_t lr_warmup = 0;

  void validate() const;
};

/// Raised when the loss turns non-finite; carries the offending iteration.
struct TrainingAborted : std::runtime_error {
  TrainingAborted(int64_t iteration, double loss)
      : std::runtime_error("non-finite loss " + std::to_string(loss) + " at iteration " +
                           std::to_string(iteration)),
        iteration(iteration) {}
  int64_t iteration;
};

struct TrainResult {
  std::filesystem::path final_checkpoint;
  int64_t iterations = 0;
  double final_loss = 0.0;
};

/// One subject reduced to the tensors training needs: the clean target
/// coefficients and the fixed-order condition stack.
struct SubjectCoeffs {
  WaveletCoefficients x0;         // target modality, 8 channels
  WaveletCoefficients condition;  // 24 channels
};

// One training context for one target modality. Construction scans and
// validates the dataset; run() drives the per-iteration loop: draw a subject,
// a timestep and noise from their named streams, assemble the 32-channel
// stack, regress the clean coefficients under MSE, and take one Adam step.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);
  Trainer(TrainConfig config, const std::filesystem::path& resume_from);

  /// One optimization step; returns the batch loss.
  double step();

  /// Loop to config.iterations with loss logging and periodic checkpoints.
  TrainResult run();

  std::filesystem::path write_checkpoint(const std::string& stem);

  int64_t iteration() const { return iteration_; }
  DenoiserNet& net() { return net_; }
  torch::optim::Adam& optimizer() { return *optimizer_; }
  const NoiseSchedule& schedule() const { return schedule_; }

  /// The exact example the next step() would train on (for tests).
  std::pair<torch::Tensor, torch::Tensor> peek_batch();

 private:
  void init_common();
  void load_subject_coefficients();
  void fill_batch(torch::Tensor& input, torch::Tensor& target, torch::Tensor& t_norm);
  CheckpointMeta current_meta();

  TrainConfig config_;
  NoiseSchedule schedule_;
  DenoiserNet net_{nullptr};
  DenoiserNet ema_net_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_;
  RngStream subject_stream_;
  RngStream timestep_stream_;
  RngStream noise_stream_;

  std::vector<SubjectRecord> records_;
  std::vector<SubjectCoeffs> cache_;  // parallel to records_ when preloading
  SubjectCoeffs subject_coeffs(int64_t index) const;

  int64_t iteration_ = 0;
};

TrainResult train(const TrainConfig& config);

struct TrainAllResult {
  CheckpointRegistry registry;
  std::vector<Modality> failed;
  bool all_ok() const { return failed.empty(); }
};

/// Trains one model per modality (canonical order), updating the registry
/// manifest after each. A failing target is marked FAILED in the manifest and
/// the remaining targets still run. `pre_train_hook` exists for fault
/// injection in tests.
TrainAllResult train_all(const TrainConfig& config_template,
                         const std::filesystem::path& registry_path, bool skip_existing,
                         const std::function<void(Modality)>& pre_train_hook = {});

}  // namespace cwdm
