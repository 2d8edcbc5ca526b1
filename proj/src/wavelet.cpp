// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/wavelet.hpp"

#include <cmath>
#include <cstring>

namespace cwdm {

WaveletCoefficients dwt3d(const Volume3D& volume) {
  for (int axis = 0; axis < 3; ++axis) {
    if (volume.shape[axis] < 2 || volume.shape[axis] % 2 != 0) {
      throw std::invalid_argument("dwt3d: extent " + std::to_string(volume.shape[axis]) +
                                  " on axis " + std::to_string(axis) +
                                  " is not even; pad_to_even the volume first");
    }
  }
  WaveletCoefficients out(
      8, {volume.shape[0] / 2, volume.shape[1] / 2, volume.shape[2] / 2});
  wavelet_detail::forward_blocks(volume.data.data(), volume.shape, out.data.data());
  return out;
}

Volume3D idwt3d(const WaveletCoefficients& coeffs) {
  if (coeffs.channels != 8) {
    throw std::invalid_argument("idwt3d: expected exactly 8 subband channels, got " +
                                std::to_string(coeffs.channels) +
                                "; slice concatenated stacks first");
  }
  Volume3D out({coeffs.shape[0] * 2, coeffs.shape[1] * 2, coeffs.shape[2] * 2});
  wavelet_detail::inverse_blocks(coeffs.data.data(), coeffs.shape, out.data.data());
  return out;
}

std::pair<Volume3D, PaddingRecord> pad_to_even(const Volume3D& volume) {
  PaddingRecord rec;
  rec.original = volume.shape;
  rec.padded = {volume.shape[0] + volume.shape[0] % 2, volume.shape[1] + volume.shape[1] % 2,
                volume.shape[2] + volume.shape[2] % 2};
  if (rec.padded == rec.original) {
    return {volume, rec};
  }
  Volume3D padded(rec.padded);
  padded.meta = volume.meta;
  for (int64_t d = 0; d < volume.shape[0]; ++d) {
    for (int64_t h = 0; h < volume.shape[1]; ++h) {
      std::memcpy(&padded.at(d, h, 0), &volume.at(d, h, 0),
                  volume.shape[2] * sizeof(float));
    }
  }
  return {std::move(padded), rec};
}

Volume3D crop_with_record(const Volume3D& volume, const PaddingRecord& record) {
  if (volume.shape != record.padded) {
    throw std::invalid_argument("crop_with_record: volume shape " +
                                shape_to_string(volume.shape) +
                                " does not match recorded padded shape " +
                                shape_to_string(record.padded));
  }
  if (volume.shape == record.original) {
    return volume;
  }
  Volume3D out(record.original);
  out.meta = volume.meta;
  for (int64_t d = 0; d < out.shape[0]; ++d) {
    for (int64_t h = 0; h < out.shape[1]; ++h) {
      std::memcpy(&out.at(d, h, 0), &volume.at(d, h, 0), out.shape[2] * sizeof(float));
    }
  }
  return out;
}

}  // namespace cwdm
