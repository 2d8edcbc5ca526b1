// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cwdm/rng.hpp"
#include "cwdm/volume_io.hpp"

namespace cwdm {

namespace fs = std::filesystem;

std::string NamingProfile::suffix_for(Modality m) const {
  for (const auto& [suffix, modality] : suffix_to_modality) {
    if (modality == m) return suffix;
  }
  throw std::invalid_argument("naming profile has no suffix for modality " + to_string(m));
}

NamingProfile default_naming_profile(std::string extension) {
  NamingProfile p;
  p.suffix_to_modality = {{"t1n", Modality::T1},
                          {"t1c", Modality::T1ce},
                          {"t2w", Modality::T2},
                          {"t2f", Modality::FLAIR}};
  p.extension = std::move(extension);
  return p;
}

namespace {

// Linear-interpolation percentile of an unsorted copy, q in [0, 100].
float percentile(std::vector<float> values, double q) {
  const double pos = q / 100.0 * double(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const double frac = pos - double(lo);
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const float v_lo = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return v_lo;
  const float v_hi = *std::min_element(values.begin() + lo + 1, values.end());
  return static_cast<float>(v_lo + frac * (double(v_hi) - double(v_lo)));
}

}  // namespace

Volume3D preprocess_volume(const Volume3D& raw, const PreprocessSpec& spec,
                           std::ostream* warn) {
  if (raw.size() == 0) throw std::invalid_argument("preprocess_volume: empty volume");
  if (spec.clip_lower_pct < 0.0 || spec.clip_lower_pct >= 50.0 || spec.clip_upper_pct < 0.0 ||
      spec.clip_upper_pct >= 50.0) {
    throw std::invalid_argument("preprocess_volume: clip percentiles must lie in [0, 50)");
  }

  const float lo = percentile(raw.data, spec.clip_lower_pct);
  const float hi = percentile(raw.data, 100.0 - spec.clip_upper_pct);

  Volume3D out(raw.shape);
  out.meta = raw.meta;
  if (!(hi > lo)) {
    if (warn) {
      *warn << "warning: degenerate intensity band (lo == hi == " << lo
            << "); volume normalized to all zeros\n";
    }
    return out;
  }
  const float scale = 1.0f / (hi - lo);
  for (int64_t i = 0; i < raw.size(); ++i) {
    const float clipped = std::clamp(raw.data[i], lo, hi);
    out.data[i] = (clipped - lo) * scale;
  }
  return out;
}

std::vector<PseudoValRecord> make_pseudo_validation(const std::vector<SubjectRecord>& records,
                                                    uint64_t seed) {
  RngStream stream(seed, "pseudoval.drop");
  std::vector<PseudoValRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.complete()) {
      throw std::invalid_argument("pseudo-validation requires complete records; case " +
                                  rec.subject_id + " is already missing a modality");
    }
    const Modality dropped = kAllModalities[stream.uniform_int(0, 3)];
    out.push_back({rec.subject_id, dropped, rec.modality_paths.at(dropped)});
  }
  return out;
}

void write_pseudo_validation_manifest(const fs::path& path,
                                      const std::vector<PseudoValRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create " + path.string());
  for (const auto& rec : records) {
    f << rec.subject_id << '\t' << to_string(rec.dropped) << '\t'
      << rec.ground_truth_path.string() << '\n';
  }
  if (!f) throw std::runtime_error("short write to " + path.string());
}

std::vector<PseudoValRecord> read_pseudo_validation_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<PseudoValRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, modality, gt_path;
    if (!std::getline(ss, id, '\t') || !std::getline(ss, modality, '\t') ||
        !std::getline(ss, gt_path)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": malformed manifest line");
    }
    const auto m = parse_modality(modality);
    if (!m) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": unknown modality '" + modality + "'");
    }
    out.push_back({id, *m, fs::path(gt_path)});
  }
  return out;
}

SubjectRecord scan_case_dir(const fs::path& case_dir, const NamingProfile& profile,
                            std::ostream* debug_log) {
  if (!fs::is_directory(case_dir)) {
    throw std::runtime_error("case directory does not exist: " + case_dir.string());
  }
  const std::string case_id = case_dir.filename().string();
  SubjectRecord rec;
  rec.subject_id = case_id;

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(case_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    if (!is_volume_file(file)) {
      if (debug_log) *debug_log << "ignoring non-volume file " << file.string() << '\n';
      continue;
    }
    const std::string stem = volume_stem(file);
    const std::string prefix = case_id + "-";
    if (stem.rfind(prefix, 0) != 0) {
      if (debug_log) *debug_log << "ignoring unrecognized file " << file.string() << '\n';
      continue;
    }
    const std::string suffix = stem.substr(prefix.size());
    const auto it = profile.suffix_to_modality.find(suffix);
    if (it == profile.suffix_to_modality.end()) {
      if (debug_log) *debug_log << "ignoring unknown suffix '" << suffix << "' in "
                                << file.string() << '\n';
      continue;
    }
    if (rec.modality_paths.contains(it->second)) {
      throw std::runtime_error("case " + case_id + " has duplicate files for modality " +
                               to_string(it->second));
    }
    rec.modality_paths[it->second] = file;
  }

  if (rec.modality_paths.size() == 3) {
    for (Modality m : kAllModalities) {
      if (!rec.modality_paths.contains(m)) rec.missing = m;
    }
  }
  return rec;
}

std::vector<SubjectRecord> scan_dataset(const fs::path& root, const NamingProfile& profile,
                                        std::ostream* debug_log) {
  if (!fs::is_directory(root)) {
    throw std::runtime_error("dataset root is not a directory: " + root.string());
  }

  std::vector<fs::path> case_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) case_dirs.push_back(entry.path());
  }
  std::sort(case_dirs.begin(), case_dirs.end());

  std::vector<SubjectRecord> records;
  for (const auto& dir : case_dirs) {
    SubjectRecord rec = scan_case_dir(dir, profile, debug_log);
    if (rec.modality_paths.size() >= 3) {
      records.push_back(std::move(rec));
    } else if (debug_log) {
      *debug_log << "skipping case " << rec.subject_id << " with "
                 << rec.modality_paths.size() << " recognized volumes\n";
    }
  }
  return records;
}

SubjectVolumes load_subject(const SubjectRecord& record) {
  SubjectVolumes out;
  out.subject_id = record.subject_id;
  for (const auto& [m, path] : record.modality_paths) {
    out.volumes[m] = read_volume(path);
  }
  return out;
}

namespace {

// Smooth phantom: a handful of random Gaussian blobs inside an ellipsoidal
// support, peak-normalized to [0, 1].
Volume3D make_phantom(const Shape3& shape, RngStream& rng) {
  constexpr int kBlobs = 6;
  struct Blob {
    double c[3];
    double sigma;
    double amp;
  };
  std::vector<Blob> blobs(kBlobs);
  for (auto& b : blobs) {
    for (int a = 0; a < 3; ++a) {
      b.c[a] = (0.25 + 0.5 * rng.uniform01()) * double(shape[a]);
    }
    b.sigma = (0.08 + 0.12 * rng.uniform01()) * double(*std::min_element(shape.begin(), shape.end()));
    b.amp = 0.4 + 0.6 * rng.uniform01();
  }

  Volume3D vol(shape);
  const double rd = double(shape[0]) * 0.48, rh = double(shape[1]) * 0.48,
               rw = double(shape[2]) * 0.48;
  const double cd = double(shape[0] - 1) / 2.0, chh = double(shape[1] - 1) / 2.0,
               cw = double(shape[2] - 1) / 2.0;
  double peak = 0.0;
  for (int64_t d = 0; d < shape[0]; ++d) {
    for (int64_t h = 0; h < shape[1]; ++h) {
      for (int64_t w = 0; w < shape[2]; ++w) {
        const double ed = (d - cd) / rd, eh = (h - chh) / rh, ew = (w - cw) / rw;
        if (ed * ed + eh * eh + ew * ew > 1.0) continue;  // outside support
        double v = 0.0;
        for (const auto& b : blobs) {
          const double dd = (d - b.c[0]) / b.sigma, dh = (h - b.c[1]) / b.sigma,
                       dw = (w - b.c[2]) / b.sigma;
          v += b.amp * std::exp(-0.5 * (dd * dd + dh * dh + dw * dw));
        }
        vol.at(d, h, w) = static_cast<float>(v);
        peak = std::max(peak, v);
      }
    }
  }
  if (peak > 0.0) {
    const float inv = static_cast<float>(1.0 / peak);
    for (auto& v : vol.data) v *= inv;
  }
  return vol;
}

// Distinct monotone remappings that fix 0 and 1, one per modality.
float remap_intensity(Modality m, float p) {
  switch (m) {
    case Modality::T1: return p;
    case Modality::T1ce: return p * p;
    case Modality::T2: return std::sqrt(p);
    case Modality::FLAIR: return p * (2.0f - p);
  }
  throw std::logic_error("unknown modality enum value");
}

}  // namespace

void generate_toy_dataset(int n_subjects, const Shape3& shape, uint64_t seed,
                          const fs::path& out_dir, const NamingProfile& profile) {
  if (n_subjects < 0) throw std::invalid_argument("generate_toy_dataset: negative subject count");
  for (int64_t extent : shape) {
    if (extent < 2) throw std::invalid_argument("generate_toy_dataset: extents must be >= 2");
  }
  fs::create_directories(out_dir);
  for (int i = 0; i < n_subjects; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "toy-%04d", i);
    RngStream rng(seed, std::string("toy.") + id);
    const Volume3D phantom = make_phantom(shape, rng);

    const fs::path case_dir = out_dir / id;
    fs::create_directories(case_dir);
    for (Modality m : kAllModalities) {
      Volume3D vol(shape);
      for (int64_t v = 0; v < phantom.size(); ++v) {
        vol.data[v] = remap_intensity(m, phantom.data[v]);
      }
      const fs::path file =
          case_dir / (std::string(id) + "-" + profile.suffix_for(m) + "." + profile.extension);
      write_volume(file, vol);
    }
  }
}

}  // namespace cwdm
