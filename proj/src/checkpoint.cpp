// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/checkpoint.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <nlohmann/json.hpp>

namespace cwdm {

using nlohmann::json;

std::string meta_to_json(const CheckpointMeta& meta) {
  json j;
  j["format_version"] = meta.format_version;
  j["target"] = to_string(meta.target);
  json order = json::array();
  for (Modality m : meta.condition_order) order.push_back(to_string(m));
  j["condition_order"] = order;
  j["schedule"] = {{"kind", to_string(meta.schedule_kind)},
                   {"timesteps", meta.timesteps},
                   {"beta_start", meta.beta_start},
                   {"beta_end", meta.beta_end}};
  j["denoiser"] = meta.denoiser;
  j["preprocess"] = {{"clip_lower_pct", meta.preprocess.clip_lower_pct},
                     {"clip_upper_pct", meta.preprocess.clip_upper_pct}};
  j["iteration"] = meta.iteration;
  j["seed"] = meta.seed;
  j["optimizer"] = {{"learning_rate", meta.learning_rate},
                    {"beta1", meta.adam_beta1},
                    {"beta2", meta.adam_beta2},
                    {"eps", meta.adam_eps}};
  j["rng_states"] = meta.rng_states;
  return j.dump(2);
}

CheckpointMeta meta_from_json(const std::string& text) {
  const json j = json::parse(text);
  CheckpointMeta meta;
  meta.format_version = j.at("format_version").get<int>();
  const auto target = parse_modality(j.at("target").get<std::string>());
  if (!target) throw std::runtime_error("checkpoint meta has unknown target modality");
  meta.target = *target;
  for (const auto& name : j.at("condition_order")) {
    const auto m = parse_modality(name.get<std::string>());
    if (!m) throw std::runtime_error("checkpoint meta has unknown condition modality");
    meta.condition_order.push_back(*m);
  }
  const auto& sched = j.at("schedule");
  meta.schedule_kind = parse_schedule_kind(sched.at("kind").get<std::string>());
  meta.timesteps = sched.at("timesteps").get<int>();
  meta.beta_start = sched.at("beta_start").get<double>();
  meta.beta_end = sched.at("beta_end").get<double>();
  meta.denoiser = j.at("denoiser").get<DenoiserConfig>();
  meta.preprocess.clip_lower_pct = j.at("preprocess").at("clip_lower_pct").get<double>();
  meta.preprocess.clip_upper_pct = j.at("preprocess").at("clip_upper_pct").get<double>();
  meta.iteration = j.at("iteration").get<int64_t>();
  meta.seed = j.at("seed").get<uint64_t>();
  const auto& opt = j.at("optimizer");
  meta.learning_rate = opt.at("learning_rate").get<double>();
  meta.adam_beta1 = opt.at("beta1").get<double>();
  meta.adam_beta2 = opt.at("beta2").get<double>();
  meta.adam_eps = opt.at("eps").get<double>();
  meta.rng_states = j.at("rng_states").get<std::map<std::string, std::string>>();
  return meta;
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta,
                     const DenoiserNet& net, torch::optim::Adam* optimizer,
                     const DenoiserNet* ema_net) {
  torch::serialize::OutputArchive archive;
  archive.write("meta", meta_to_json(meta));
  archive.write("has_optimizer", optimizer != nullptr);
  archive.write("has_ema", ema_net != nullptr);

  torch::serialize::OutputArchive model_archive;
  net->save(model_archive);
  archive.write("model", model_archive);

  if (optimizer) {
    torch::serialize::OutputArchive optim_archive;
    optimizer->save(optim_archive);
    archive.write("optim", optim_archive);
  }
  if (ema_net) {
    torch::serialize::OutputArchive ema_archive;
    (*ema_net)->save(ema_archive);
    archive.write("ema", ema_archive);
  }
  archive.save_to(path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("checkpoint not found: " + path.string());
  }
  torch::serialize::InputArchive archive;
  archive.load_from(path.string());

  c10::IValue meta_value;
  archive.read("meta", meta_value);
  LoadedCheckpoint out;
  out.meta = meta_from_json(meta_value.toStringRef());
  if (out.meta.format_version != kCheckpointFormatVersion) {
    throw std::runtime_error("checkpoint " + path.string() + " has format version " +
                             std::to_string(out.meta.format_version) + ", this build reads " +
                             std::to_string(kCheckpointFormatVersion));
  }

  c10::IValue has_optim;
  archive.read("has_optimizer", has_optim);
  out.has_optimizer_state = has_optim.toBool();

  out.net = DenoiserNet(out.meta.denoiser);
  torch::serialize::InputArchive model_archive;
  archive.read("model", model_archive);
  out.net->load(model_archive);

  c10::IValue has_ema;
  archive.read("has_ema", has_ema);
  if (has_ema.toBool()) {
    out.ema_net = DenoiserNet(out.meta.denoiser);
    torch::serialize::InputArchive ema_archive;
    archive.read("ema", ema_archive);
    out.ema_net->load(ema_archive);
  }
  return out;
}

void load_optimizer_state(const std::filesystem::path& path, torch::optim::Adam& optimizer) {
  torch::serialize::InputArchive archive;
  archive.load_from(path.string());
  torch::serialize::InputArchive optim_archive;
  archive.read("optim", optim_archive);
  optimizer.load(optim_archive);
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for hashing");

  auto* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);

  std::vector<char> buffer(1 << 16);
  while (f) {
    f.read(buffer.data(), buffer.size());
    if (f.gcount() > 0) EVP_DigestUpdate(ctx, buffer.data(), f.gcount());
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace cwdm
