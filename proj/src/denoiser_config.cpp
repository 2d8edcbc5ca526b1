// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/denoiser_config.hpp"

#include <stdexcept>

namespace cwdm {

std::string to_string(SkipMode mode) {
  return mode == SkipMode::additive ? "additive" : "concatenation";
}

SkipMode parse_skip_mode(const std::string& name) {
  if (name == "additive") return SkipMode::additive;
  if (name == "concatenation") return SkipMode::concatenation;
  throw std::invalid_argument("unknown skip mode '" + name +
                              "' (expected additive or concatenation)");
}

void DenoiserConfig::validate() const {
  if (in_channels <= 8 || in_channels % 8 != 0) {
    throw std::invalid_argument("denoiser in_channels must be 8 * (1 + #conditions), got " +
                                std::to_string(in_channels));
  }
  if (out_channels != 8) {
    throw std::invalid_argument("denoiser out_channels must be 8 (one subband stack)");
  }
  if (base_channels <= 0) throw std::invalid_argument("denoiser base_channels must be positive");
  if (depth_levels < 1) throw std::invalid_argument("denoiser depth_levels must be >= 1");
  if (static_cast<int>(channel_multipliers.size()) != depth_levels) {
    throw std::invalid_argument("denoiser channel_multipliers must list one entry per level (" +
                                std::to_string(channel_multipliers.size()) + " entries for " +
                                std::to_string(depth_levels) + " levels)");
  }
  for (int m : channel_multipliers) {
    if (m <= 0) throw std::invalid_argument("denoiser channel multipliers must be positive");
  }
  if (res_blocks_per_level < 1) {
    throw std::invalid_argument("denoiser res_blocks_per_level must be >= 1");
  }
  if (time_embedding_dim < 4 || time_embedding_dim % 2 != 0) {
    throw std::invalid_argument("denoiser time_embedding_dim must be even and >= 4");
  }
  for (int level : attention_levels) {
    if (level < 0 || level >= depth_levels) {
      throw std::invalid_argument("denoiser attention level " + std::to_string(level) +
                                  " outside [0, " + std::to_string(depth_levels) + ")");
    }
  }
}

void to_json(nlohmann::json& j, const DenoiserConfig& c) {
  j = nlohmann::json{{"in_channels", c.in_channels},
                     {"out_channels", c.out_channels},
                     {"base_channels", c.base_channels},
                     {"depth_levels", c.depth_levels},
                     {"channel_multipliers", c.channel_multipliers},
                     {"res_blocks_per_level", c.res_blocks_per_level},
                     {"skip_mode", to_string(c.skip_mode)},
                     {"time_embedding_dim", c.time_embedding_dim},
                     {"attention_levels", c.attention_levels}};
}

void from_json(const nlohmann::json& j, DenoiserConfig& c) {
  j.at("in_channels").get_to(c.in_channels);
  j.at("out_channels").get_to(c.out_channels);
  j.at("base_channels").get_to(c.base_channels);
  j.at("depth_levels").get_to(c.depth_levels);
  j.at("channel_multipliers").get_to(c.channel_multipliers);
  j.at("res_blocks_per_level").get_to(c.res_blocks_per_level);
  c.skip_mode = parse_skip_mode(j.at("skip_mode").get<std::string>());
  j.at("time_embedding_dim").get_to(c.time_embedding_dim);
  j.at("attention_levels").get_to(c.attention_levels);
}

}  // namespace cwdm
