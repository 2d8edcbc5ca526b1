// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "cwdm/wavelet.hpp"

namespace cwdm {

WaveletCoefficients reverse_step(const WaveletCoefficients& x_t,
                                 const WaveletCoefficients& x0_pred, int t,
                                 const NoiseSchedule& schedule,
                                 const WaveletCoefficients& noise) {
  if (!x_t.same_layout(x0_pred) || !x_t.same_layout(noise)) {
    throw std::invalid_argument("reverse_step: x_t, x0_pred and noise layouts must match");
  }
  const PosteriorParams p = posterior_params(schedule, t);
  const float c0 = static_cast<float>(p.coef_x0);
  const float ct = static_cast<float>(p.coef_xt);
  const float sigma = static_cast<float>(std::sqrt(p.variance));
  WaveletCoefficients out(x_t.channels, x_t.shape);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = c0 * x0_pred.data[i] + ct * x_t.data[i] + sigma * noise.data[i];
  }
  return out;
}

double training_loss(const WaveletCoefficients& x0_pred, const WaveletCoefficients& x0_true) {
  if (!x0_pred.same_layout(x0_true)) {
    throw std::invalid_argument("training_loss: prediction and target layouts must match");
  }
  double acc = 0.0;
  for (size_t i = 0; i < x0_pred.data.size(); ++i) {
    const double diff = double(x0_pred.data[i]) - double(x0_true.data[i]);
    acc += diff * diff;
  }
  return acc / double(x0_pred.data.size());
}

std::vector<Modality> condition_order(Modality target) {
  std::vector<Modality> order;
  for (Modality m : kAllModalities) {
    if (m != target) order.push_back(m);
  }
  return order;
}

TrainingInputs training_step_inputs(const std::map<Modality, Volume3D>& volumes,
                                    Modality target, int t, const WaveletCoefficients& noise,
                                    const NoiseSchedule& schedule) {
  for (Modality m : kAllModalities) {
    if (!volumes.contains(m)) {
      throw std::invalid_argument("training subject is missing modality " + to_string(m) +
                                  "; training data must be complete");
    }
  }
  const Shape3 base_shape = volumes.begin()->second.shape;
  for (const auto& [m, v] : volumes) {
    if (v.shape != base_shape) {
      throw std::invalid_argument("training subject volumes are not co-shaped: " +
                                  to_string(m) + " is " + shape_to_string(v.shape));
    }
  }

  TrainingInputs out;
  out.x0 = dwt3d(pad_to_even(volumes.at(target)).first);

  std::vector<WaveletCoefficients> cond;
  cond.reserve(3);
  for (Modality m : condition_order(target)) {
    cond.push_back(dwt3d(pad_to_even(volumes.at(m)).first));
  }

  const WaveletCoefficients x_t = q_sample(out.x0, t, noise, schedule);
  out.stacked = concat_channels({&x_t, &cond[0], &cond[1], &cond[2]});
  return out;
}

}  // namespace cwdm
