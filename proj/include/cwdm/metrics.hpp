// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cwdm/data.hpp"
#include "cwdm/volume.hpp"

namespace cwdm {

/// Mean squared voxel difference, accumulated in double.
double mse(const Volume3D& a, const Volume3D& b);

/// -10 * log10(mse) for the given data range. An exact-zero MSE is reported
/// as the cap (default 100 dB) so aggregates stay finite; any nonzero MSE
/// uses the analytic formula untouched.
double psnr(const Volume3D& a, const Volume3D& b, double data_range = 1.0,
            double cap_db = 100.0);

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
  double sigma = 1.5;   // Gaussian window std-dev
  int window = 7;       // window size per axis (odd); 7 keeps small toy volumes usable
};

/// Mean local structural similarity over 3D Gaussian windows. The SSIM map is
/// evaluated on the interior region where the window fits entirely, matching
/// the usual valid-window convention.
double ssim(const Volume3D& a, const Volume3D& b, const SsimParams& params = {});

enum class CropMode { full, cropped_224 };

std::string to_string(CropMode mode);
CropMode parse_crop_mode(const std::string& name);

/// Centered crop to at most (155, 224, 224); axes already smaller are kept.
Volume3D apply_crop(const Volume3D& v, CropMode mode);

struct CaseMetrics {
  std::string case_id;
  Modality target = Modality::FLAIR;
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricsAggregate {
  int cases = 0;
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricsReport {
  std::vector<CaseMetrics> per_case;
  std::map<Modality, MetricsAggregate> per_modality;
  MetricsAggregate overall;
  std::vector<std::string> missing_predictions;
  CropMode crop_mode = CropMode::full;
  SsimParams ssim_params;
  bool preprocessed_ground_truth = true;
};

struct EvaluateOptions {
  CropMode crop_mode = CropMode::full;
  SsimParams ssim_params;
  /// Normalize ground-truth volumes with `preprocess` before comparing, so
  /// scores are computed on normalized volumes even when the manifest points
  /// at raw data. Predictions are always taken as-is.
  bool preprocess_ground_truth = true;
  PreprocessSpec preprocess;
  std::string prediction_extension = "nii.gz";
};

/// Scores every manifest case against `<predictions_dir>/<case>-<suffix>.<ext>`.
/// Missing predictions are listed in the report and excluded from aggregates;
/// callers treat a non-empty missing list as a partial failure.
MetricsReport evaluate_split(const std::filesystem::path& predictions_dir,
                             const std::vector<PseudoValRecord>& manifest,
                             const NamingProfile& profile, const EvaluateOptions& options);

/// Aligned text table with per-modality and overall rows.
std::string render_report_table(const MetricsReport& report);

/// Machine-readable companion: one header row then one row per case.
void write_report_tsv(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace cwdm
