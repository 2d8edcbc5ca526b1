// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/volume.hpp"

#include <cstring>

namespace cwdm {

std::string to_string(Modality m) {
  switch (m) {
    case Modality::FLAIR: return "FLAIR";
    case Modality::T1: return "T1";
    case Modality::T1ce: return "T1ce";
    case Modality::T2: return "T2";
  }
  throw std::logic_error("unknown modality enum value");
}

std::optional<Modality> parse_modality(const std::string& name) {
  for (Modality m : kAllModalities) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

WaveletCoefficients concat_channels(const std::vector<const WaveletCoefficients*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  int64_t total = 0;
  for (const auto* p : parts) {
    if (p->shape != parts.front()->shape) {
      throw std::invalid_argument("concat_channels: spatial shapes differ (" +
                                  shape_to_string(p->shape) + " vs " +
                                  shape_to_string(parts.front()->shape) + ")");
    }
    total += p->channels;
  }
  WaveletCoefficients out(total, parts.front()->shape);
  float* dst = out.data.data();
  for (const auto* p : parts) {
    std::memcpy(dst, p->data.data(), p->data.size() * sizeof(float));
    dst += p->data.size();
  }
  return out;
}

WaveletCoefficients slice_channels(const WaveletCoefficients& src, int64_t first, int64_t count) {
  if (first < 0 || count <= 0 || first + count > src.channels) {
    throw std::invalid_argument("slice_channels: channel range [" + std::to_string(first) +
                                ", " + std::to_string(first + count) + ") out of bounds for " +
                                std::to_string(src.channels) + " channels");
  }
  WaveletCoefficients out(count, src.shape);
  std::memcpy(out.data.data(), src.channel_data(first), out.data.size() * sizeof(float));
  return out;
}

}  // namespace cwdm
