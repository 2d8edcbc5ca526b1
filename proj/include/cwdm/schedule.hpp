// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cwdm/volume.hpp"

namespace cwdm {

enum class ScheduleKind { linear, cosine };

std::string to_string(ScheduleKind k);
ScheduleKind parse_schedule_kind(const std::string& name);

// Per-timestep diffusion tables. Timesteps are 1-based; index 0 holds the
// conventions alpha_bar[0] = 1 and one_minus_alpha_bar[0] = 0 so t = 1 needs
// no special handling. All tables are double precision: alpha_bar reaches
// ~1e-5 at T = 1000 and would shed digits in float.
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::linear;
  int timesteps = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;

  std::vector<double> beta;                 // [0] unused
  std::vector<double> alpha;                // alpha[t] = 1 - beta[t], [0] unused
  std::vector<double> alpha_bar;            // prod of alpha[1..t], alpha_bar[0] = 1
  std::vector<double> one_minus_alpha_bar;  // kept as a separate recurrence, see make_schedule
  std::vector<double> beta_tilde;           // posterior variance, beta_tilde[1] = 0
};

/// Weights of the reverse-transition mean plus its variance:
/// mean = coef_x0 * x0_pred + coef_xt * x_t, variance = beta_tilde.
struct PosteriorParams {
  double coef_x0 = 0.0;
  double coef_xt = 0.0;
  double variance = 0.0;
};

/// Builds the schedule tables. The linear rule interpolates beta between
/// beta_start and beta_end; the cosine rule derives betas from the squared
/// cosine alpha_bar profile (offset 0.008, betas clipped at 0.999) and
/// ignores the beta bounds.
NoiseSchedule make_schedule(ScheduleKind kind, int timesteps, double beta_start = 1e-4,
                            double beta_end = 0.02);

PosteriorParams posterior_params(const NoiseSchedule& schedule, int t);

/// Closed-form forward marginal: sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise.
WaveletCoefficients q_sample(const WaveletCoefficients& x0, int t,
                             const WaveletCoefficients& noise, const NoiseSchedule& schedule);

}  // namespace cwdm
