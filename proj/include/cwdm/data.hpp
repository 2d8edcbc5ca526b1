// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cwdm/volume.hpp"

namespace cwdm {

/// Maps dataset filename suffixes to modality codes, e.g. "t1n" -> T1.
struct NamingProfile {
  std::map<std::string, Modality> suffix_to_modality;
  std::string extension = "nii.gz";

  std::string suffix_for(Modality m) const;
};

/// BraTS-2024-style suffixes: t1n, t1c, t2w, t2f.
NamingProfile default_naming_profile(std::string extension = "nii.gz");

enum class Split { train, val, pseudo_val };

struct SubjectRecord {
  std::string subject_id;
  std::map<Modality, std::filesystem::path> modality_paths;
  std::optional<Modality> missing;
  Split split = Split::train;

  bool complete() const { return modality_paths.size() == 4 && !missing; }
};

struct PreprocessSpec {
  double clip_lower_pct = 0.1;
  double clip_upper_pct = 0.1;
};

/// Clips to the volume's own [lower, 100-upper] percentile band (linear
/// interpolation over all voxels, background included) and maps that band
/// affinely onto [0, 1]. A degenerate band yields an all-zero volume and a
/// warning on `warn` instead of an error, so batch jobs survive corrupt cases.
Volume3D preprocess_volume(const Volume3D& raw, const PreprocessSpec& spec,
                           std::ostream* warn = nullptr);

/// One pseudo-validation case: a complete record with one modality dropped,
/// keeping the ground-truth path aside for evaluation.
struct PseudoValRecord {
  std::string subject_id;
  Modality dropped;
  std::filesystem::path ground_truth_path;
};

/// Drops one modality per subject, uniformly and reproducibly from the seed.
/// Every input record must be complete.
std::vector<PseudoValRecord> make_pseudo_validation(const std::vector<SubjectRecord>& records,
                                                    uint64_t seed);

void write_pseudo_validation_manifest(const std::filesystem::path& path,
                                      const std::vector<PseudoValRecord>& records);
std::vector<PseudoValRecord> read_pseudo_validation_manifest(const std::filesystem::path& path);

/// Collects the recognized `<case_id>-<suffix>.<ext>` volumes of one case
/// directory. Unrecognized files are reported on `debug_log` and skipped; two
/// files for one modality is an error. The record's `missing` field is set
/// when exactly one modality is absent.
SubjectRecord scan_case_dir(const std::filesystem::path& case_dir, const NamingProfile& profile,
                            std::ostream* debug_log = nullptr);

/// Walks `<root>/<case_id>/` and returns one record per case directory,
/// sorted by id. Cases end up `complete` or with exactly one missing
/// modality; anything sparser is skipped with a note.
std::vector<SubjectRecord> scan_dataset(const std::filesystem::path& root,
                                        const NamingProfile& profile,
                                        std::ostream* debug_log = nullptr);

/// A subject's volumes loaded into memory.
struct SubjectVolumes {
  std::string subject_id;
  std::map<Modality, Volume3D> volumes;
};

SubjectVolumes load_subject(const SubjectRecord& record);

/// Writes a synthetic dataset of `n_subjects` cases under `out_dir`. Each
/// case shares one smooth random phantom; the four "modalities" are distinct
/// monotone intensity remappings of it that fix zero (so all four share a
/// support mask and the cross-modality mappings are learnable). Deterministic
/// in the seed, byte-for-byte.
void generate_toy_dataset(int n_subjects, const Shape3& shape, uint64_t seed,
                          const std::filesystem::path& out_dir,
                          const NamingProfile& profile = default_naming_profile());

}  // namespace cwdm
