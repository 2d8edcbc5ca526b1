// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cwdm/diffusion.hpp"
#include "cwdm/schedule.hpp"
#include "cwdm/volume.hpp"

namespace cwdm {

/// What the sampling loop needs from a denoiser: the 8-channel clean-
/// coefficient prediction for a 32-channel noisy+condition stack at step t.
class DenoiseModel {
 public:
  virtual ~DenoiseModel() = default;
  virtual WaveletCoefficients predict(const WaveletCoefficients& stacked, int t) = 0;
};

/// The three available volumes of a case awaiting synthesis.
struct ModalitySet {
  std::set<Modality> available;
  std::map<Modality, Volume3D> volumes;
};

struct RegistryEntry {
  std::filesystem::path checkpoint_path;
  std::string sha256;
  bool complete = true;
};

/// Maps each modality to the checkpoint trained to generate it. Stored as a
/// plain-text manifest: `<modality>\t<path>\t<sha256>` per line, with "FAILED"
/// in the path column marking a target whose training did not finish.
struct CheckpointRegistry {
  std::map<Modality, RegistryEntry> entries;

  static CheckpointRegistry load(const std::filesystem::path& manifest_path);
  void save(const std::filesystem::path& manifest_path) const;
};

/// Picks the missing modality and its checkpoint. Exactly one modality must
/// be missing and the registry must have a completed entry for it.
std::pair<Modality, RegistryEntry> select_model(const ModalitySet& modalities,
                                                const CheckpointRegistry& registry);

/// Observation hook for debug snapshots; receives the post-transition state.
using SampleObserver = std::function<void(const DiffusionState&)>;

/// Runs the reverse chain conditioned on the given volumes (already
/// preprocessed, co-registered and ordered to match the model's training
/// order). Draws x_T from the "sample.init" stream, walks t = T..1 forming
/// the 32-channel stack and applying one reverse transition per step, then
/// inverts the final coefficients, crops any padding and clamps to [0, 1].
Volume3D conditional_sample(DenoiseModel& model, const std::vector<Volume3D>& conditions,
                            const NoiseSchedule& schedule, uint64_t seed,
                            const SampleObserver& observer = {});

}  // namespace cwdm
