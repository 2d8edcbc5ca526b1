// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "cwdm/volume.hpp"

namespace cwdm {

// Single-level 3D discrete wavelet transform on the orthonormal Haar basis
// (filter taps 1/sqrt(2), +-1/sqrt(2)). Each 2x2x2 block of the input maps to
// one coefficient in each of the 8 subbands, so the transform is linear,
// orthonormal, and inverts exactly up to rounding.

/// Forward transform. Input extents must all be even (pad first).
WaveletCoefficients dwt3d(const Volume3D& volume);

/// Inverse transform of an 8-channel stack back to a volume.
Volume3D idwt3d(const WaveletCoefficients& coeffs);

/// Zero-pads odd axes at their far end so every extent is even.
std::pair<Volume3D, PaddingRecord> pad_to_even(const Volume3D& volume);

/// Removes the padding recorded by pad_to_even.
Volume3D crop_with_record(const Volume3D& volume, const PaddingRecord& record);

namespace wavelet_detail {

// Raw-buffer kernels, templated so tests can exercise a double-precision
// round trip. Layouts match Volume3D / WaveletCoefficients: the volume is
// (D, H, W) width-fastest, coefficients are 8 channel-major subbands of
// extents (D/2, H/2, W/2).

template <typename T>
void forward_blocks(const T* vol, const Shape3& vol_shape, T* coeffs) {
  const int64_t cd = vol_shape[0] / 2, ch = vol_shape[1] / 2, cw = vol_shape[2] / 2;
  const int64_t plane = vol_shape[1] * vol_shape[2];
  const int64_t row = vol_shape[2];
  const int64_t band = cd * ch * cw;
  const T scale = T(1) / (T(2) * std::sqrt(T(2)));  // (1/sqrt(2))^3
  for (int64_t d = 0; d < cd; ++d) {
    for (int64_t h = 0; h < ch; ++h) {
      for (int64_t w = 0; w < cw; ++w) {
        const T* base = vol + (2 * d) * plane + (2 * h) * row + 2 * w;
        T corner[8];
        for (int c = 0; c < 8; ++c) {
          const int64_t di = (c >> 2) & 1, hi = (c >> 1) & 1, wi = c & 1;
          corner[c] = base[di * plane + hi * row + wi];
        }
        const int64_t out = (d * ch + h) * cw + w;
        for (int s = 0; s < 8; ++s) {
          T acc = 0;
          for (int c = 0; c < 8; ++c) {
            // Negative sign wherever a high-pass axis meets the second sample.
            const int flips = ((s & c) & 4 ? 1 : 0) + ((s & c) & 2 ? 1 : 0) + ((s & c) & 1);
            acc += (flips & 1) ? -corner[c] : corner[c];
          }
          coeffs[s * band + out] = acc * scale;
        }
      }
    }
  }
}

template <typename T>
void inverse_blocks(const T* coeffs, const Shape3& coeff_shape, T* vol) {
  const int64_t cd = coeff_shape[0], ch = coeff_shape[1], cw = coeff_shape[2];
  const int64_t plane = (2 * ch) * (2 * cw);
  const int64_t row = 2 * cw;
  const int64_t band = cd * ch * cw;
  const T scale = T(1) / (T(2) * std::sqrt(T(2)));
  for (int64_t d = 0; d < cd; ++d) {
    for (int64_t h = 0; h < ch; ++h) {
      for (int64_t w = 0; w < cw; ++w) {
        const int64_t in = (d * ch + h) * cw + w;
        T sub[8];
        for (int s = 0; s < 8; ++s) sub[s] = coeffs[s * band + in];
        T* base = vol + (2 * d) * plane + (2 * h) * row + 2 * w;
        for (int c = 0; c < 8; ++c) {
          T acc = 0;
          for (int s = 0; s < 8; ++s) {
            const int flips = ((s & c) & 4 ? 1 : 0) + ((s & c) & 2 ? 1 : 0) + ((s & c) & 1);
            acc += (flips & 1) ? -sub[s] : sub[s];
          }
          const int64_t di = (c >> 2) & 1, hi = (c >> 1) & 1, wi = c & 1;
          base[di * plane + hi * row + wi] = acc * scale;
        }
      }
    }
  }
}

}  // namespace wavelet_detail
}  // namespace cwdm
