// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace cwdm {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t hash_seed(uint64_t master_seed, std::string_view label) {
  // FNV-1a over the label, mixed with the master seed.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(master_seed));
}

RngStream::RngStream(uint64_t master_seed, std::string_view purpose)
    : engine_(hash_seed(master_seed, purpose)) {}

float RngStream::normal() { return normal_(engine_); }

void RngStream::fill_normal(std::span<float> out) {
  for (float& v : out) v = normal_(engine_);
}

double RngStream::uniform01() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

int64_t RngStream::uniform_int(int64_t lo, int64_t hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
  return std::uniform_int_distribution<int64_t>(lo, hi)(engine_);
}

std::string RngStream::serialize() const {
  std::ostringstream oss;
  oss << engine_ << '\n' << normal_;
  return oss.str();
}

void RngStream::restore(const std::string& state) {
  std::istringstream iss(state);
  iss >> engine_ >> normal_;
  if (iss.fail()) throw std::runtime_error("RngStream::restore: malformed state string");
}

}  // namespace cwdm
