// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/figures.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace cwdm {

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.height <= 0 || image.width <= 0) {
    throw std::invalid_argument("write_png: empty image");
  }
  std::unique_ptr<FILE, decltype(&std::fclose)> fp(std::fopen(path.string().c_str(), "wb"),
                                                   &std::fclose);
  if (!fp) throw std::runtime_error("cannot create " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error while writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int64_t r = 0; r < image.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + r * image.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

uint8_t to_gray(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(clamped * 255.0f));
}

}  // namespace

GrayImage middle_slice(const Volume3D& volume, SlicePlane plane) {
  const auto [D, H, W] = volume.shape;
  switch (plane) {
    case SlicePlane::axial: {
      GrayImage img(H, W);
      const int64_t d = D / 2;
      for (int64_t h = 0; h < H; ++h)
        for (int64_t w = 0; w < W; ++w) img.at(h, w) = to_gray(volume.at(d, h, w));
      return img;
    }
    case SlicePlane::coronal: {
      GrayImage img(D, W);
      const int64_t h = H / 2;
      for (int64_t d = 0; d < D; ++d)
        for (int64_t w = 0; w < W; ++w) img.at(d, w) = to_gray(volume.at(d, h, w));
      return img;
    }
    case SlicePlane::sagittal: {
      GrayImage img(D, H);
      const int64_t w = W / 2;
      for (int64_t d = 0; d < D; ++d)
        for (int64_t h = 0; h < H; ++h) img.at(d, h) = to_gray(volume.at(d, h, w));
      return img;
    }
  }
  throw std::logic_error("unknown slice plane");
}

GrayImage make_comparison_panel(const Volume3D& real, const Volume3D& synthetic) {
  if (real.shape != synthetic.shape) {
    throw std::invalid_argument("panel volumes must share a shape, got " +
                                shape_to_string(real.shape) + " vs " +
                                shape_to_string(synthetic.shape));
  }
  constexpr int kGap = 2;
  std::vector<GrayImage> rows;
  for (SlicePlane plane : {SlicePlane::axial, SlicePlane::sagittal, SlicePlane::coronal}) {
    rows.push_back(middle_slice(real, plane));
    rows.push_back(middle_slice(synthetic, plane));
  }
  int64_t width = 0, height = 0;
  for (const auto& r : rows) {
    width = std::max(width, r.width);
    height += r.height + kGap;
  }
  GrayImage panel(height - kGap, width);
  int64_t row_offset = 0;
  for (const auto& r : rows) {
    const int64_t col_offset = (width - r.width) / 2;
    for (int64_t y = 0; y < r.height; ++y) {
      for (int64_t x = 0; x < r.width; ++x) {
        panel.at(row_offset + y, col_offset + x) = r.at(y, x);
      }
    }
    row_offset += r.height + kGap;
  }
  return panel;
}

}  // namespace cwdm
