// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/config.hpp"

#include <fstream>
#include <set>

namespace cwdm {

using nlohmann::json;

void RunConfig::apply_toy_preset() {
  schedule.kind = "linear";
  schedule.timesteps = 100;
  // Matches the terminal alpha_bar of the full-length schedule so sampling
  // still starts from (almost) pure noise.
  schedule.beta_start = 1e-3;
  schedule.beta_end = 0.2;

  denoiser.base_channels = 16;
  denoiser.depth_levels = 2;
  denoiser.channel_multipliers = {1, 2};
  denoiser.res_blocks_per_level = 1;
  denoiser.time_embedding_dim = 64;
  denoiser.attention_levels = {};

  train.iterations = 3000;
  train.learning_rate = 1e-3;
  train.checkpoint_every = 1000;
  train.preload = true;
}

void RunConfig::validate() const {
  denoiser.validate();
  if (schedule.timesteps < 1) throw std::invalid_argument("schedule.timesteps must be >= 1");
  parse_schedule_kind(schedule.kind);
  if (!parse_modality(train.target_modality)) {
    throw std::invalid_argument("train.target_modality '" + train.target_modality +
                                "' is not one of T1, T1ce, T2, FLAIR");
  }
  if (train.iterations < 1) throw std::invalid_argument("train.iterations must be >= 1");
  if (train.batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (preprocess.clip_lower_pct < 0 || preprocess.clip_lower_pct >= 50 ||
      preprocess.clip_upper_pct < 0 || preprocess.clip_upper_pct >= 50) {
    throw std::invalid_argument("preprocess clip percentiles must lie in [0, 50)");
  }
  if (sampling.workers < 1) throw std::invalid_argument("sampling.workers must be >= 1");
  parse_crop_mode(evaluate.crop_mode);
  for (const auto& [suffix, code] : dataset.naming) {
    if (!parse_modality(code)) {
      throw std::invalid_argument("dataset.naming maps suffix '" + suffix +
                                  "' to unknown modality '" + code + "'");
    }
  }
}

NamingProfile RunConfig::naming_profile() const {
  NamingProfile profile = default_naming_profile(dataset.extension);
  if (!dataset.naming.empty()) {
    profile.suffix_to_modality.clear();
    for (const auto& [suffix, code] : dataset.naming) {
      profile.suffix_to_modality[suffix] = *parse_modality(code);
    }
  }
  return profile;
}

NoiseSchedule RunConfig::make_noise_schedule() const {
  return make_schedule(parse_schedule_kind(schedule.kind), schedule.timesteps,
                       schedule.beta_start, schedule.beta_end);
}

Modality RunConfig::target_modality() const { return *parse_modality(train.target_modality); }

CropMode RunConfig::crop_mode() const { return parse_crop_mode(evaluate.crop_mode); }

json RunConfig::to_json() const {
  json naming_j = json::object();
  for (const auto& [suffix, code] : dataset.naming) naming_j[suffix] = code;
  return json{
      {"dataset",
       {{"root", dataset.root.string()},
        {"extension", dataset.extension},
        {"naming", naming_j}}},
      {"preprocess",
       {{"clip_lower_pct", preprocess.clip_lower_pct},
        {"clip_upper_pct", preprocess.clip_upper_pct}}},
      {"schedule",
       {{"kind", schedule.kind},
        {"timesteps", schedule.timesteps},
        {"beta_start", schedule.beta_start},
        {"beta_end", schedule.beta_end}}},
      {"denoiser", denoiser},
      {"train",
       {{"target_modality", train.target_modality},
        {"iterations", train.iterations},
        {"learning_rate", train.learning_rate},
        {"batch_size", train.batch_size},
        {"checkpoint_every", train.checkpoint_every},
        {"seed", train.seed},
        {"preload", train.preload},
        {"torch_threads", train.torch_threads},
        {"ema_decay", train.ema_decay},
        {"grad_clip", train.grad_clip},
        {"lr_warmup", train.lr_warmup}}},
      {"sampling",
       {{"seed", sampling.seed},
        {"workers", sampling.workers},
        {"preprocess_inputs", sampling.preprocess_inputs},
        {"snapshot_stride", sampling.snapshot_stride}}},
      {"evaluate",
       {{"crop_mode", evaluate.crop_mode}, {"preprocess_gt", evaluate.preprocess_gt}}},
      {"output", {{"dir", output.dir.string()}}}};
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& section) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw std::invalid_argument("unknown config key '" +
                                  (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void maybe_path(const json& j, const char* key, std::filesystem::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  reject_unknown_keys(j, {"dataset", "preprocess", "schedule", "denoiser", "train", "sampling",
                          "evaluate", "output"},
                      "");
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown_keys(d, {"root", "extension", "naming"}, "dataset");
    maybe_path(d, "root", cfg.dataset.root);
    maybe(d, "extension", cfg.dataset.extension);
    if (d.contains("naming")) {
      cfg.dataset.naming = d.at("naming").get<std::map<std::string, std::string>>();
    }
  }
  if (j.contains("preprocess")) {
    const auto& p = j.at("preprocess");
    reject_unknown_keys(p, {"clip_lower_pct", "clip_upper_pct"}, "preprocess");
    maybe(p, "clip_lower_pct", cfg.preprocess.clip_lower_pct);
    maybe(p, "clip_upper_pct", cfg.preprocess.clip_upper_pct);
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    reject_unknown_keys(s, {"kind", "timesteps", "beta_start", "beta_end"}, "schedule");
    maybe(s, "kind", cfg.schedule.kind);
    maybe(s, "timesteps", cfg.schedule.timesteps);
    maybe(s, "beta_start", cfg.schedule.beta_start);
    maybe(s, "beta_end", cfg.schedule.beta_end);
  }
  if (j.contains("denoiser")) {
    const auto& d = j.at("denoiser");
    reject_unknown_keys(d,
                        {"in_channels", "out_channels", "base_channels", "depth_levels",
                         "channel_multipliers", "res_blocks_per_level", "skip_mode",
                         "time_embedding_dim", "attention_levels"},
                        "denoiser");
    maybe(d, "in_channels", cfg.denoiser.in_channels);
    maybe(d, "out_channels", cfg.denoiser.out_channels);
    maybe(d, "base_channels", cfg.denoiser.base_channels);
    maybe(d, "depth_levels", cfg.denoiser.depth_levels);
    maybe(d, "channel_multipliers", cfg.denoiser.channel_multipliers);
    maybe(d, "res_blocks_per_level", cfg.denoiser.res_blocks_per_level);
    if (d.contains("skip_mode")) {
      cfg.denoiser.skip_mode = parse_skip_mode(d.at("skip_mode").get<std::string>());
    }
    maybe(d, "time_embedding_dim", cfg.denoiser.time_embedding_dim);
    maybe(d, "attention_levels", cfg.denoiser.attention_levels);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown_keys(t,
                        {"target_modality", "iterations", "learning_rate", "batch_size",
                         "checkpoint_every", "seed", "preload", "torch_threads", "ema_decay",
                         "grad_clip", "lr_warmup"},
                        "train");
    maybe(t, "target_modality", cfg.train.target_modality);
    maybe(t, "iterations", cfg.train.iterations);
    maybe(t, "learning_rate", cfg.train.learning_rate);
    maybe(t, "batch_size", cfg.train.batch_size);
    maybe(t, "checkpoint_every", cfg.train.checkpoint_every);
    maybe(t, "seed", cfg.train.seed);
    maybe(t, "preload", cfg.train.preload);
    maybe(t, "torch_threads", cfg.train.torch_threads);
    maybe(t, "ema_decay", cfg.train.ema_decay);
    maybe(t, "grad_clip", cfg.train.grad_clip);
    maybe(t, "lr_warmup", cfg.train.lr_warmup);
  }
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    reject_unknown_keys(s, {"seed", "workers", "preprocess_inputs", "snapshot_stride"},
                        "sampling");
    maybe(s, "seed", cfg.sampling.seed);
    maybe(s, "workers", cfg.sampling.workers);
    maybe(s, "preprocess_inputs", cfg.sampling.preprocess_inputs);
    maybe(s, "snapshot_stride", cfg.sampling.snapshot_stride);
  }
  if (j.contains("evaluate")) {
    const auto& e = j.at("evaluate");
    reject_unknown_keys(e, {"crop_mode", "preprocess_gt"}, "evaluate");
    maybe(e, "crop_mode", cfg.evaluate.crop_mode);
    maybe(e, "preprocess_gt", cfg.evaluate.preprocess_gt);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown_keys(o, {"dir"}, "output");
    maybe_path(o, "dir", cfg.output.dir);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::echo_into(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / "resolved_config.json");
  if (!f) throw std::runtime_error("cannot write resolved config into " + dir.string());
  f << to_json().dump(2) << '\n';
}

}  // namespace cwdm
