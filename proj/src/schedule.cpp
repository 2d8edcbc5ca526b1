// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cwdm {

std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::linear ? "linear" : "cosine";
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "linear") return ScheduleKind::linear;
  if (name == "cosine") return ScheduleKind::cosine;
  throw std::invalid_argument("unknown schedule kind '" + name + "' (expected linear or cosine)");
}

namespace {

std::vector<double> linear_betas(int timesteps, double beta_start, double beta_end) {
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw std::invalid_argument("linear schedule requires 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> beta(timesteps + 1, 0.0);
  for (int t = 1; t <= timesteps; ++t) {
    beta[t] = timesteps == 1
                  ? beta_start
                  : beta_start + (beta_end - beta_start) * (t - 1) / double(timesteps - 1);
  }
  return beta;
}

std::vector<double> cosine_betas(int timesteps) {
  constexpr double s = 0.008;
  constexpr double max_beta = 0.999;
  auto f = [&](double t) {
    const double u = (t / timesteps + s) / (1.0 + s) * std::numbers::pi / 2.0;
    return std::cos(u) * std::cos(u);
  };
  const double f0 = f(0.0);
  std::vector<double> beta(timesteps + 1, 0.0);
  double prev_bar = 1.0;
  for (int t = 1; t <= timesteps; ++t) {
    const double bar = f(double(t)) / f0;
    beta[t] = std::min(1.0 - bar / prev_bar, max_beta);
    prev_bar = bar;
  }
  return beta;
}

}  // namespace

NoiseSchedule make_schedule(ScheduleKind kind, int timesteps, double beta_start,
                            double beta_end) {
  if (timesteps < 1) throw std::invalid_argument("schedule requires timesteps >= 1");

  NoiseSchedule s;
  s.kind = kind;
  s.timesteps = timesteps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.beta = kind == ScheduleKind::linear ? linear_betas(timesteps, beta_start, beta_end)
                                        : cosine_betas(timesteps);

  s.alpha.assign(timesteps + 1, 0.0);
  s.alpha_bar.assign(timesteps + 1, 1.0);
  // 1 - alpha_bar is accumulated through its own recurrence,
  //   omab[t] = beta[t] * alpha_bar[t-1] + omab[t-1],
  // rather than computed as 1 - alpha_bar[t]. This keeps small-t values exact
  // (omab[1] == beta[1] bit-for-bit), which the posterior identities at t = 1
  // rely on, and avoids cancellation while alpha_bar is still close to 1.
  s.one_minus_alpha_bar.assign(timesteps + 1, 0.0);
  s.beta_tilde.assign(timesteps + 1, 0.0);

  for (int t = 1; t <= timesteps; ++t) {
    if (!(s.beta[t] > 0.0 && s.beta[t] < 1.0)) {
      throw std::invalid_argument("schedule produced beta out of (0, 1) at t=" +
                                  std::to_string(t));
    }
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
    s.one_minus_alpha_bar[t] = s.beta[t] * s.alpha_bar[t - 1] + s.one_minus_alpha_bar[t - 1];
    s.beta_tilde[t] = s.one_minus_alpha_bar[t - 1] / s.one_minus_alpha_bar[t] * s.beta[t];
    if (!(s.alpha_bar[t] < s.alpha_bar[t - 1])) {
      throw std::invalid_argument("schedule alpha_bar is not strictly decreasing at t=" +
                                  std::to_string(t));
    }
  }
  return s;
}

namespace {

void check_timestep(const NoiseSchedule& s, int t) {
  if (t < 1 || t > s.timesteps) {
    throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " +
                            std::to_string(s.timesteps) + "]");
  }
}

}  // namespace

PosteriorParams posterior_params(const NoiseSchedule& s, int t) {
  check_timestep(s, t);
  PosteriorParams p;
  p.coef_x0 = std::sqrt(s.alpha_bar[t - 1]) * s.beta[t] / s.one_minus_alpha_bar[t];
  p.coef_xt = std::sqrt(s.alpha[t]) * s.one_minus_alpha_bar[t - 1] / s.one_minus_alpha_bar[t];
  p.variance = s.beta_tilde[t];
  return p;
}

WaveletCoefficients q_sample(const WaveletCoefficients& x0, int t,
                             const WaveletCoefficients& noise, const NoiseSchedule& schedule) {
  check_timestep(schedule, t);
  if (!x0.same_layout(noise)) {
    throw std::invalid_argument("q_sample: noise layout does not match x0");
  }
  const float signal_scale = static_cast<float>(std::sqrt(schedule.alpha_bar[t]));
  const float noise_scale = static_cast<float>(std::sqrt(schedule.one_minus_alpha_bar[t]));
  WaveletCoefficients out(x0.channels, x0.shape);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = signal_scale * x0.data[i] + noise_scale * noise.data[i];
  }
  return out;
}

}  // namespace cwdm
