// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "cwdm/data.hpp"
#include "cwdm/sampler.hpp"

namespace cwdm {

struct SynthesisOptions {
  uint64_t seed = 7;
  NamingProfile naming = default_naming_profile();
  PreprocessSpec preprocess;
  /// Normalize the conditioning volumes before sampling. Matches training;
  /// disable only when inputs are already normalized by `preprocess`.
  bool preprocess_inputs = true;
  std::filesystem::path out_dir;
  int workers = 1;
  int torch_threads = 1;
  /// When > 0, write every Nth intermediate state as a volume for figures.
  int snapshot_stride = 0;
};

struct CaseResult {
  std::string case_id;
  Modality target = Modality::FLAIR;
  uint64_t seed = 0;
  double seconds = 0.0;
  std::filesystem::path output_path;
};

/// End-to-end handling of one case directory holding exactly three modality
/// volumes: detect the missing modality, load its model, preprocess, run the
/// conditional sampler, and write `<case>-<suffix>.<ext>` into out_dir. A log
/// line per case lands in `<out_dir>/synthesis_log.jsonl`.
CaseResult process_case(const std::filesystem::path& case_dir,
                        const CheckpointRegistry& registry, const SynthesisOptions& options);

struct ManifestSynthesisResult {
  std::vector<CaseResult> done;
  std::vector<std::pair<std::string, std::string>> failures;  // case id -> reason
  bool all_ok() const { return failures.empty(); }
};

/// Pseudo-validation synthesis: every manifest case is synthesized from the
/// dataset tree, treating the manifest's dropped modality as missing even
/// though the file exists. Cases run in parallel on `options.workers`
/// threads; per-case seeds derive from (seed, case id) so the schedule of
/// workers cannot change any output. Failing cases are collected, not fatal.
ManifestSynthesisResult synthesize_manifest(const std::filesystem::path& dataset_root,
                                            const std::vector<PseudoValRecord>& manifest,
                                            const CheckpointRegistry& registry,
                                            const SynthesisOptions& options);

}  // namespace cwdm
