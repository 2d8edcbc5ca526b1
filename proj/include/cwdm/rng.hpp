// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace cwdm {

/// Stable 64-bit hash used to derive per-purpose and per-case seeds.
uint64_t hash_seed(uint64_t master_seed, std::string_view label);

// One named random stream. Every stochastic draw in the pipeline comes from a
// stream named after its purpose ("train.noise", "sample.init", ...) so runs
// are reproducible and training can resume bit-exactly after a restart. The
// full engine + distribution state round-trips through serialize()/restore().
class RngStream {
 public:
  RngStream(uint64_t master_seed, std::string_view purpose);

  float normal();
  void fill_normal(std::span<float> out);
  double uniform01();
  /// Uniform integer in [lo, hi], both inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);

  std::string serialize() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<float> normal_{0.0f, 1.0f};
};

}  // namespace cwdm
