// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>

#include "cwdm/diffusion.hpp"
#include "cwdm/wavelet.hpp"

namespace cwdm {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning_rate must be finite and >= 0");
  }
  if (checkpoint_every < 0) throw std::invalid_argument("train: checkpoint_every must be >= 0");
  if (timesteps < 1) throw std::invalid_argument("train: timesteps must be >= 1");
  if (dataset_root.empty()) throw std::invalid_argument("train: dataset_root is required");
  if (out_dir.empty()) throw std::invalid_argument("train: out_dir is required");
  if (ema_decay < 0.0 || ema_decay >= 1.0) {
    throw std::invalid_argument("train: ema_decay must lie in [0, 1)");
  }
  if (grad_clip < 0.0) throw std::invalid_argument("train: grad_clip must be >= 0");
  if (lr_warmup < 0) throw std::invalid_argument("train: lr_warmup must be >= 0");
  denoiser.validate();
}

namespace {

torch::optim::Adam make_adam(DenoiserNet& net, const TrainConfig& cfg) {
  auto options = torch::optim::AdamOptions(cfg.learning_rate)
                     .betas({0.9, 0.999})
                     .eps(1e-8);
  return torch::optim::Adam(net->parameters(), options);
}

void set_lr(torch::optim::Adam& optimizer, double lr) {
  for (auto& group : optimizer.param_groups()) {
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      schedule_(make_schedule(config_.schedule_kind, config_.timesteps, config_.beta_start,
                              config_.beta_end)),
      subject_stream_(config_.seed, "train.subject"),
      timestep_stream_(config_.seed, "train.timestep"),
      noise_stream_(config_.seed, "train.noise") {
  config_.validate();
  torch::set_num_threads(std::max(1, config_.torch_threads));
  net_ = build_denoiser(config_.denoiser, hash_seed(config_.seed, "train.init"));
  optimizer_ = std::make_unique<torch::optim::Adam>(make_adam(net_, config_));
  if (config_.ema_decay > 0.0) {
    ema_net_ = build_denoiser(config_.denoiser, hash_seed(config_.seed, "train.init"));
    torch::NoGradGuard no_grad;
    auto src = net_->parameters();
    auto dst = ema_net_->parameters();
    for (size_t i = 0; i < src.size(); ++i) dst[i].copy_(src[i]);
  }
  init_common();
}

Trainer::Trainer(TrainConfig config, const fs::path& resume_from)
    : config_(std::move(config)),
      schedule_(make_schedule(config_.schedule_kind, config_.timesteps, config_.beta_start,
                              config_.beta_end)),
      subject_stream_(config_.seed, "train.subject"),
      timestep_stream_(config_.seed, "train.timestep"),
      noise_stream_(config_.seed, "train.noise") {
  config_.validate();
  torch::set_num_threads(std::max(1, config_.torch_threads));

  LoadedCheckpoint ckpt = load_checkpoint(resume_from);
  if (ckpt.meta.target != config_.target) {
    throw std::runtime_error("resume target " + to_string(ckpt.meta.target) +
                             " does not match configured target " + to_string(config_.target));
  }
  if (ckpt.meta.timesteps != config_.timesteps || ckpt.meta.schedule_kind != config_.schedule_kind) {
    throw std::runtime_error("resume checkpoint was trained with a different schedule");
  }
  net_ = ckpt.net;
  iteration_ = ckpt.meta.iteration;
  optimizer_ = std::make_unique<torch::optim::Adam>(make_adam(net_, config_));
  if (ckpt.has_optimizer_state) {
    load_optimizer_state(resume_from, *optimizer_);
  }
  if (config_.ema_decay > 0.0) {
    if (!ckpt.ema_net) {
      throw std::runtime_error("resume checkpoint holds no EMA weights but ema_decay is set");
    }
    ema_net_ = ckpt.ema_net;
  }
  const auto restore = [&](RngStream& stream, const std::string& name) {
    const auto it = ckpt.meta.rng_states.find(name);
    if (it == ckpt.meta.rng_states.end()) {
      throw std::runtime_error("checkpoint lacks RNG state '" + name + "' needed for resume");
    }
    stream.restore(it->second);
  };
  restore(subject_stream_, "train.subject");
  restore(timestep_stream_, "train.timestep");
  restore(noise_stream_, "train.noise");
  init_common();
}

void Trainer::init_common() {
  records_ = scan_dataset(config_.dataset_root, config_.naming);
  if (records_.empty()) {
    throw std::runtime_error("no training cases found under " + config_.dataset_root.string());
  }
  for (const auto& rec : records_) {
    if (!rec.complete()) {
      throw std::runtime_error("training requires complete subjects; case " + rec.subject_id +
                               " is missing modality " +
                               (rec.missing ? to_string(*rec.missing) : "unknown"));
    }
  }
  if (config_.preload) load_subject_coefficients();
  fs::create_directories(config_.out_dir);
}

namespace {

SubjectCoeffs subject_to_coeffs(const SubjectVolumes& subject, Modality target,
                                const PreprocessSpec& preprocess) {
  std::map<Modality, Volume3D> processed;
  for (const auto& [m, vol] : subject.volumes) {
    processed[m] = preprocess_volume(vol, preprocess, &std::cerr);
  }
  SubjectCoeffs out;
  out.x0 = dwt3d(pad_to_even(processed.at(target)).first);
  std::vector<WaveletCoefficients> cond;
  for (Modality m : condition_order(target)) {
    cond.push_back(dwt3d(pad_to_even(processed.at(m)).first));
  }
  out.condition = concat_channels({&cond[0], &cond[1], &cond[2]});
  return out;
}

}  // namespace

void Trainer::load_subject_coefficients() {
  cache_.clear();
  cache_.reserve(records_.size());
  for (const auto& rec : records_) {
    cache_.push_back(subject_to_coeffs(load_subject(rec), config_.target, config_.preprocess));
  }
}

SubjectCoeffs Trainer::subject_coeffs(int64_t index) const {
  if (config_.preload) return cache_[index];
  return subject_to_coeffs(load_subject(records_[index]), config_.target, config_.preprocess);
}

void Trainer::fill_batch(torch::Tensor& input, torch::Tensor& target, torch::Tensor& t_norm) {
  const int64_t subjects = static_cast<int64_t>(records_.size());
  for (int b = 0; b < config_.batch_size; ++b) {
    const int64_t idx = subject_stream_.uniform_int(0, subjects - 1);
    const int t = static_cast<int>(timestep_stream_.uniform_int(1, config_.timesteps));
    const SubjectCoeffs coeffs = subject_coeffs(idx);

    WaveletCoefficients noise(coeffs.x0.channels, coeffs.x0.shape);
    noise_stream_.fill_normal(noise.data);
    const WaveletCoefficients x_t = q_sample(coeffs.x0, t, noise, schedule_);

    if (!input.defined()) {
      const auto& s = coeffs.x0.shape;
      input = torch::empty({config_.batch_size, config_.denoiser.in_channels, s[0], s[1], s[2]},
                           torch::kFloat);
      target = torch::empty({config_.batch_size, 8, s[0], s[1], s[2]}, torch::kFloat);
      t_norm = torch::empty({config_.batch_size}, torch::kFloat);
    }
    float* in_ptr = input[b].data_ptr<float>();
    std::memcpy(in_ptr, x_t.data.data(), x_t.data.size() * sizeof(float));
    std::memcpy(in_ptr + x_t.data.size(), coeffs.condition.data.data(),
                coeffs.condition.data.size() * sizeof(float));
    std::memcpy(target[b].data_ptr<float>(), coeffs.x0.data.data(),
                coeffs.x0.data.size() * sizeof(float));
    t_norm[b] = float(t) / float(config_.timesteps);
  }
}

std::pair<torch::Tensor, torch::Tensor> Trainer::peek_batch() {
  const std::string subject_state = subject_stream_.serialize();
  const std::string timestep_state = timestep_stream_.serialize();
  const std::string noise_state = noise_stream_.serialize();
  torch::Tensor input, target, t_norm;
  fill_batch(input, target, t_norm);
  subject_stream_.restore(subject_state);
  timestep_stream_.restore(timestep_state);
  noise_stream_.restore(noise_state);
  return {input, target};
}

double Trainer::step() {
  ++iteration_;
  if (config_.lr_warmup > 0 && iteration_ <= config_.lr_warmup) {
    set_lr(*optimizer_, config_.learning_rate * double(iteration_) / double(config_.lr_warmup));
  }

  torch::Tensor input, target, t_norm;
  fill_batch(input, target, t_norm);

  optimizer_->zero_grad();
  auto prediction = net_->forward(input, t_norm);
  auto loss = torch::mse_loss(prediction, target);
  const double loss_value = loss.item<double>();
  if (!std::isfinite(loss_value)) throw TrainingAborted(iteration_, loss_value);

  loss.backward();
  if (config_.grad_clip > 0.0) {
    torch::nn::utils::clip_grad_norm_(net_->parameters(), config_.grad_clip);
  }
  optimizer_->step();

  if (ema_net_) {
    torch::NoGradGuard no_grad;
    auto src = net_->parameters();
    auto dst = ema_net_->parameters();
    for (size_t i = 0; i < src.size(); ++i) {
      dst[i].mul_(config_.ema_decay).add_(src[i], 1.0 - config_.ema_decay);
    }
  }
  return loss_value;
}

CheckpointMeta Trainer::current_meta() {
  CheckpointMeta meta;
  meta.target = config_.target;
  meta.condition_order = condition_order(config_.target);
  meta.schedule_kind = config_.schedule_kind;
  meta.timesteps = config_.timesteps;
  meta.beta_start = config_.beta_start;
  meta.beta_end = config_.beta_end;
  meta.denoiser = config_.denoiser;
  meta.preprocess = config_.preprocess;
  meta.iteration = iteration_;
  meta.seed = config_.seed;
  meta.learning_rate = config_.learning_rate;
  meta.rng_states["train.subject"] = subject_stream_.serialize();
  meta.rng_states["train.timestep"] = timestep_stream_.serialize();
  meta.rng_states["train.noise"] = noise_stream_.serialize();
  return meta;
}

fs::path Trainer::write_checkpoint(const std::string& stem) {
  const fs::path path = config_.out_dir / (stem + ".pt");
  save_checkpoint(path, current_meta(), net_, optimizer_.get(),
                  ema_net_ ? &ema_net_ : nullptr);
  return path;
}

TrainResult Trainer::run() {
  std::ofstream loss_log(config_.out_dir / "loss_log.tsv", std::ios::app);
  if (!loss_log) {
    throw std::runtime_error("cannot open loss log in " + config_.out_dir.string());
  }
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  fs::path last_periodic;
  while (iteration_ < config_.iterations) {
    double loss = 0.0;
    try {
      loss = step();
    } catch (const TrainingAborted& abort) {
      loss_log << abort.iteration << "\tnan\taborted\n";
      loss_log.flush();
      throw;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    loss_log << iteration_ << '\t' << loss << '\t' << seconds << '\n';
    result.final_loss = loss;

    if (config_.checkpoint_every > 0 && iteration_ % config_.checkpoint_every == 0) {
      last_periodic = write_checkpoint("checkpoint-" + std::to_string(iteration_));
    }
  }
  loss_log.flush();

  const fs::path final_path = config_.out_dir / "checkpoint-final.pt";
  if (!last_periodic.empty() && iteration_ % config_.checkpoint_every == 0) {
    fs::copy_file(last_periodic, final_path, fs::copy_options::overwrite_existing);
  } else {
    save_checkpoint(final_path, current_meta(), net_, optimizer_.get(),
                    ema_net_ ? &ema_net_ : nullptr);
  }
  result.final_checkpoint = final_path;
  result.iterations = iteration_;
  return result;
}

TrainResult train(const TrainConfig& config) { return Trainer(config).run(); }

TrainAllResult train_all(const TrainConfig& config_template, const fs::path& registry_path,
                         bool skip_existing, const std::function<void(Modality)>& pre_train_hook) {
  TrainAllResult result;
  if (skip_existing && fs::exists(registry_path)) {
    result.registry = CheckpointRegistry::load(registry_path);
  }
  fs::create_directories(registry_path.parent_path().empty() ? "."
                                                             : registry_path.parent_path());

  for (Modality target : kAllModalities) {
    if (skip_existing) {
      const auto it = result.registry.entries.find(target);
      if (it != result.registry.entries.end() && it->second.complete &&
          fs::exists(it->second.checkpoint_path)) {
        continue;
      }
    }
    TrainConfig cfg = config_template;
    cfg.target = target;
    cfg.out_dir = config_template.out_dir / to_string(target);
    try {
      if (pre_train_hook) pre_train_hook(target);
      const TrainResult r = train(cfg);
      RegistryEntry entry;
      entry.checkpoint_path = r.final_checkpoint;
      entry.sha256 = file_sha256(r.final_checkpoint);
      entry.complete = true;
      result.registry.entries[target] = entry;
    } catch (const std::exception& e) {
      std::cerr << "training for target " << to_string(target) << " failed: " << e.what()
                << '\n';
      RegistryEntry entry;
      entry.complete = false;
      result.registry.entries[target] = entry;
      result.failed.push_back(target);
    }
    result.registry.save(registry_path);
  }
  return result;
}

}  // namespace cwdm
