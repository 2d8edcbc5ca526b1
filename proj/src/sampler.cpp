// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/sampler.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cwdm/rng.hpp"
#include "cwdm/wavelet.hpp"

namespace cwdm {

CheckpointRegistry CheckpointRegistry::load(const std::filesystem::path& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) throw std::runtime_error("cannot open registry manifest " + manifest_path.string());
  CheckpointRegistry reg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string modality, path, hash;
    if (!std::getline(ss, modality, '\t') || !std::getline(ss, path, '\t') ||
        !std::getline(ss, hash)) {
      throw std::runtime_error(manifest_path.string() + ":" + std::to_string(lineno) +
                               ": malformed registry line");
    }
    const auto m = parse_modality(modality);
    if (!m) {
      throw std::runtime_error(manifest_path.string() + ":" + std::to_string(lineno) +
                               ": unknown modality '" + modality + "'");
    }
    RegistryEntry entry;
    entry.complete = path != "FAILED";
    if (entry.complete) entry.checkpoint_path = path;
    entry.sha256 = hash;
    reg.entries[*m] = std::move(entry);
  }
  return reg;
}

void CheckpointRegistry::save(const std::filesystem::path& manifest_path) const {
  std::ofstream f(manifest_path);
  if (!f) throw std::runtime_error("cannot create registry manifest " + manifest_path.string());
  for (const auto& [m, entry] : entries) {
    f << to_string(m) << '\t' << (entry.complete ? entry.checkpoint_path.string() : "FAILED")
      << '\t' << (entry.sha256.empty() ? "-" : entry.sha256) << '\n';
  }
  if (!f) throw std::runtime_error("short write to " + manifest_path.string());
}

std::pair<Modality, RegistryEntry> select_model(const ModalitySet& modalities,
                                                const CheckpointRegistry& registry) {
  std::vector<Modality> missing;
  for (Modality m : kAllModalities) {
    if (!modalities.available.contains(m)) missing.push_back(m);
  }
  if (missing.empty()) {
    throw std::invalid_argument("all four modalities present: nothing to synthesize");
  }
  if (missing.size() > 1) {
    throw std::invalid_argument("exactly one modality may be missing, found " +
                                std::to_string(missing.size()) + " absent");
  }
  for (Modality m : modalities.available) {
    if (!modalities.volumes.contains(m)) {
      throw std::invalid_argument("modality " + to_string(m) +
                                  " marked available but has no volume");
    }
  }
  const Modality target = missing.front();
  const auto it = registry.entries.find(target);
  if (it == registry.entries.end() || !it->second.complete) {
    throw std::runtime_error("registry has no completed checkpoint for target modality " +
                             to_string(target));
  }
  return {target, it->second};
}

Volume3D conditional_sample(DenoiseModel& model, const std::vector<Volume3D>& conditions,
                            const NoiseSchedule& schedule, uint64_t seed,
                            const SampleObserver& observer) {
  if (conditions.size() != 3) {
    throw std::invalid_argument("conditional sampling requires exactly 3 conditioning volumes");
  }
  for (const auto& c : conditions) {
    if (c.shape != conditions.front().shape) {
      throw std::invalid_argument("conditioning volumes are not co-shaped: " +
                                  shape_to_string(c.shape) + " vs " +
                                  shape_to_string(conditions.front().shape));
    }
  }

  // c = DWT(C1) (+) DWT(C2) (+) DWT(C3), fixed for the whole chain.
  PaddingRecord pad_record;
  std::vector<WaveletCoefficients> cond_coeffs;
  cond_coeffs.reserve(3);
  for (const auto& c : conditions) {
    auto [padded, rec] = pad_to_even(c);
    pad_record = rec;
    cond_coeffs.push_back(dwt3d(padded));
  }

  const Shape3 coeff_shape = cond_coeffs.front().shape;
  WaveletCoefficients x_t(8, coeff_shape);
  RngStream init_stream(seed, "sample.init");
  init_stream.fill_normal(x_t.data);
  RngStream step_stream(seed, "sample.step");

  // Assemble the 32-channel stack once; only the first 8 channels change.
  WaveletCoefficients stacked =
      concat_channels({&x_t, &cond_coeffs[0], &cond_coeffs[1], &cond_coeffs[2]});
  const size_t noisy_bytes = x_t.data.size() * sizeof(float);

  WaveletCoefficients noise(8, coeff_shape);
  for (int t = schedule.timesteps; t >= 1; --t) {
    std::memcpy(stacked.data.data(), x_t.data.data(), noisy_bytes);
    const WaveletCoefficients x0_pred = model.predict(stacked, t);
    if (x0_pred.channels != 8 || x0_pred.shape != coeff_shape) {
      throw std::runtime_error("denoiser returned a mis-shaped prediction at t=" +
                               std::to_string(t));
    }
    if (t > 1) {
      step_stream.fill_normal(noise.data);
    } else {
      std::fill(noise.data.begin(), noise.data.end(), 0.0f);
    }
    x_t = reverse_step(x_t, x0_pred, t, schedule, noise);
    if (observer) observer(DiffusionState{x_t, t - 1});
  }

  Volume3D out = crop_with_record(idwt3d(x_t), pad_record);
  for (auto& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
  out.meta = conditions.front().meta;
  return out;
}

}  // namespace cwdm
