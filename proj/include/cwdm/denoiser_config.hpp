// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cwdm {

/// How encoder features enter the decoder at each resolution.
enum class SkipMode { additive, concatenation };

std::string to_string(SkipMode mode);
SkipMode parse_skip_mode(const std::string& name);

// Architecture hyperparameters of the time-conditioned 3D U-Net. The input is
// the 8-channel noisy target stack plus the 24-channel condition; the output
// is always the 8 predicted clean subbands.
struct DenoiserConfig {
  int in_channels = 32;
  int out_channels = 8;
  int base_channels = 64;
  int depth_levels = 4;
  std::vector<int> channel_multipliers = {1, 2, 4, 8};
  int res_blocks_per_level = 2;
  SkipMode skip_mode = SkipMode::concatenation;
  int time_embedding_dim = 256;
  std::vector<int> attention_levels = {};

  /// Spatial extents must divide by this for the down/up path to close.
  int required_divisor() const { return 1 << (depth_levels - 1); }

  void validate() const;
};

void to_json(nlohmann::json& j, const DenoiserConfig& c);
void from_json(const nlohmann::json& j, DenoiserConfig& c);

}  // namespace cwdm
