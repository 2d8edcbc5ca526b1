// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cwdm/volume.hpp"

namespace cwdm {

/// 8-bit grayscale raster.
struct GrayImage {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int64_t h, int64_t w) : height(h), width(w), pixels(h * w, 0) {}
  uint8_t& at(int64_t r, int64_t c) { return pixels[r * width + c]; }
  uint8_t at(int64_t r, int64_t c) const { return pixels[r * width + c]; }
};

void write_png(const std::filesystem::path& path, const GrayImage& image);

enum class SlicePlane { axial, sagittal, coronal };

/// Middle slice (floor(extent / 2)) through the requested plane. Intensities
/// map [0, 1] -> [0, 255] directly with no per-slice rescaling.
GrayImage middle_slice(const Volume3D& volume, SlicePlane plane);

/// One comparison panel: for each plane (axial, sagittal, coronal) the real
/// slice sits above the synthetic one, stacked into a single column.
GrayImage make_comparison_panel(const Volume3D& real, const Volume3D& synthetic);

}  // namespace cwdm
