// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwdm {

/// Grid extents in (depth, height, width) order; width varies fastest in memory.
using Shape3 = std::array<int64_t, 3>;

inline int64_t element_count(const Shape3& s) { return s[0] * s[1] * s[2]; }

inline std::string shape_to_string(const Shape3& s) {
  return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[2]);
}

// Acquisition metadata carried through the pipeline untouched. `header_blob`
// keeps the source file's raw header so orientation and spacing survive a
// read-modify-write cycle without this code understanding every field.
struct VolumeMeta {
  std::array<float, 3> spacing{1.0f, 1.0f, 1.0f};
  std::vector<char> header_blob;
};

/// Single-channel scalar field over a D x H x W grid.
struct Volume3D {
  Shape3 shape{0, 0, 0};
  std::vector<float> data;
  VolumeMeta meta;

  Volume3D() = default;
  Volume3D(Shape3 s, float fill = 0.0f) : shape(s), data(element_count(s), fill) {}

  int64_t size() const { return static_cast<int64_t>(data.size()); }

  float& at(int64_t d, int64_t h, int64_t w) {
    return data[(d * shape[1] + h) * shape[2] + w];
  }
  const float& at(int64_t d, int64_t h, int64_t w) const {
    return data[(d * shape[1] + h) * shape[2] + w];
  }
};

/// The eight single-level subbands. Letter order is the axis order the filters
/// are applied in (depth, height, width); L = low-pass, H = high-pass. The
/// channel index encodes high-pass flags as bits: depth=4, height=2, width=1.
enum class Subband : int {
  LLL = 0,
  LLH = 1,
  LHL = 2,
  LHH = 3,
  HLL = 4,
  HLH = 5,
  HHL = 6,
  HHH = 7,
};

// Stack of wavelet subbands (or channel-concatenated stacks of several
// volumes' subbands) over a (D/2, H/2, W/2) grid.
struct WaveletCoefficients {
  int64_t channels = 0;
  Shape3 shape{0, 0, 0};  // coefficient-space extents
  std::vector<float> data;

  WaveletCoefficients() = default;
  WaveletCoefficients(int64_t c, Shape3 s, float fill = 0.0f)
      : channels(c), shape(s), data(c * element_count(s), fill) {}

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int64_t per_channel() const { return element_count(shape); }

  float* channel_data(int64_t c) { return data.data() + c * per_channel(); }
  const float* channel_data(int64_t c) const { return data.data() + c * per_channel(); }

  float& at(int64_t c, int64_t d, int64_t h, int64_t w) {
    return data[((c * shape[0] + d) * shape[1] + h) * shape[2] + w];
  }
  const float& at(int64_t c, int64_t d, int64_t h, int64_t w) const {
    return data[((c * shape[0] + d) * shape[1] + h) * shape[2] + w];
  }

  bool same_layout(const WaveletCoefficients& other) const {
    return channels == other.channels && shape == other.shape;
  }
};

/// Records how a volume was zero-padded to even extents so the inverse
/// transform's output can be cropped back to the original grid.
struct PaddingRecord {
  Shape3 original{0, 0, 0};
  Shape3 padded{0, 0, 0};
};

enum class Modality : int { FLAIR = 0, T1 = 1, T1ce = 2, T2 = 3 };

/// All four modality codes in their canonical (alphabetical) order.
inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::FLAIR, Modality::T1, Modality::T1ce, Modality::T2};

std::string to_string(Modality m);
std::optional<Modality> parse_modality(const std::string& name);

/// Channel-wise concatenation, e.g. building the 24-channel condition stack.
WaveletCoefficients concat_channels(const std::vector<const WaveletCoefficients*>& parts);

/// Copies `count` channels starting at `first` into a new stack.
WaveletCoefficients slice_channels(const WaveletCoefficients& src, int64_t first, int64_t count);

}  // namespace cwdm
