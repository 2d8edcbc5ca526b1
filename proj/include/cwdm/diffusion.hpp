// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <vector>

#include "cwdm/schedule.hpp"
#include "cwdm/volume.hpp"

namespace cwdm {

/// One point of the reverse chain: the noisy coefficients at timestep t.
struct DiffusionState {
  WaveletCoefficients x_t;
  int t = 0;
};

/// One reverse transition: posterior mean of (x_t, x0_pred) plus
/// sqrt(beta_tilde_t) * noise. At t = 1 the variance is zero and the result
/// is exactly x0_pred.
WaveletCoefficients reverse_step(const WaveletCoefficients& x_t,
                                 const WaveletCoefficients& x0_pred, int t,
                                 const NoiseSchedule& schedule,
                                 const WaveletCoefficients& noise);

/// Mean squared error over all coefficient entries. The mean (rather than the
/// plain squared norm) keeps loss magnitudes comparable across resolutions;
/// the two differ only by the constant element count.
double training_loss(const WaveletCoefficients& x0_pred, const WaveletCoefficients& x0_true);

/// Conditioning order: all modalities in canonical order with the target
/// removed. Pinned here once; trainer writes it into checkpoints and the
/// sampler replays it from there.
std::vector<Modality> condition_order(Modality target);

struct TrainingInputs {
  WaveletCoefficients stacked;  // x_t (8 channels) followed by the 24-channel condition
  WaveletCoefficients x0;       // clean target coefficients, the regression target
};

/// Builds one training example from a complete subject: pads every volume to
/// even extents, transforms, noises the target to timestep t, and prepends it
/// to the fixed-order condition stack.
TrainingInputs training_step_inputs(const std::map<Modality, Volume3D>& volumes,
                                    Modality target, int t, const WaveletCoefficients& noise,
                                    const NoiseSchedule& schedule);

}  // namespace cwdm
