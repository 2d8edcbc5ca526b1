// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cwdm/checkpoint.hpp"
#include "cwdm/denoiser.hpp"
#include "cwdm/rng.hpp"
#include "cwdm/volume_io.hpp"
#include "cwdm/wavelet.hpp"

namespace cwdm {

namespace fs = std::filesystem;

namespace {

void append_log_line(const fs::path& out_dir, const CaseResult& result, std::mutex* mutex) {
  nlohmann::json line = {{"case_id", result.case_id},
                         {"target", to_string(result.target)},
                         {"seed", result.seed},
                         {"seconds", result.seconds}};
  std::unique_lock<std::mutex> lock;
  if (mutex) lock = std::unique_lock<std::mutex>(*mutex);
  std::ofstream log(out_dir / "synthesis_log.jsonl", std::ios::app);
  log << line.dump() << '\n';
}

CaseResult run_single_case(const std::string& case_id,
                           const std::map<Modality, fs::path>& condition_paths,
                           Modality target, TorchDenoiser& model, const CheckpointMeta& meta,
                           const NoiseSchedule& schedule, const SynthesisOptions& options,
                           std::mutex* log_mutex) {
  const auto start = std::chrono::steady_clock::now();

  std::map<Modality, Volume3D> volumes;
  for (const auto& [m, path] : condition_paths) {
    Volume3D v = read_volume(path);
    if (options.preprocess_inputs) v = preprocess_volume(v, meta.preprocess);
    volumes[m] = std::move(v);
  }

  // The condition order is replayed from the checkpoint, never recomputed.
  std::vector<Volume3D> conditions;
  conditions.reserve(3);
  for (Modality m : meta.condition_order) {
    const auto it = volumes.find(m);
    if (it == volumes.end()) {
      throw std::runtime_error("case " + case_id + " lacks conditioning modality " +
                               to_string(m) + " required by the checkpoint");
    }
    conditions.push_back(it->second);
  }

  SampleObserver observer;
  if (options.snapshot_stride > 0) {
    const fs::path snap_dir = options.out_dir / "snapshots";
    fs::create_directories(snap_dir);
    const int stride = options.snapshot_stride;
    observer = [&, snap_dir, stride, case_id](const DiffusionState& state) {
      if (state.t % stride != 0) return;
      const Volume3D snapshot = idwt3d(state.x_t);
      write_volume(snap_dir / (case_id + "-t" + std::to_string(state.t) + ".nii.gz"), snapshot);
    };
  }

  const uint64_t case_seed = hash_seed(options.seed, case_id);
  Volume3D synthesized = conditional_sample(model, conditions, schedule, case_seed, observer);

  fs::create_directories(options.out_dir);
  const fs::path out_path =
      options.out_dir /
      (case_id + "-" + options.naming.suffix_for(target) + "." + options.naming.extension);
  write_volume(out_path, synthesized);

  CaseResult result;
  result.case_id = case_id;
  result.target = target;
  result.seed = case_seed;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.output_path = out_path;
  append_log_line(options.out_dir, result, log_mutex);
  return result;
}

std::string expected_patterns(const NamingProfile& naming) {
  std::ostringstream oss;
  bool first = true;
  for (const auto& [suffix, m] : naming.suffix_to_modality) {
    if (!first) oss << ", ";
    oss << "<case>-" << suffix << "." << naming.extension;
    first = false;
  }
  return oss.str();
}

}  // namespace

CaseResult process_case(const fs::path& case_dir, const CheckpointRegistry& registry,
                        const SynthesisOptions& options) {
  torch::set_num_threads(std::max(1, options.torch_threads));
  const SubjectRecord record = scan_case_dir(case_dir, options.naming);
  if (record.modality_paths.empty()) {
    throw std::runtime_error("no modality volumes found in " + case_dir.string() +
                             "; expected files like " + expected_patterns(options.naming));
  }
  if (record.modality_paths.size() != 3) {
    throw std::runtime_error("case " + record.subject_id + " has " +
                             std::to_string(record.modality_paths.size()) +
                             " modality volumes; exactly 3 are required for synthesis");
  }

  ModalitySet set;
  for (const auto& [m, path] : record.modality_paths) {
    set.available.insert(m);
    set.volumes[m] = Volume3D();  // placeholder; volumes are loaded lazily below
  }
  const auto [target, entry] = select_model(set, registry);

  LoadedCheckpoint ckpt = load_checkpoint(entry.checkpoint_path);
  if (ckpt.meta.target != target) {
    throw std::runtime_error("registry entry for " + to_string(target) +
                             " points at a checkpoint trained for " +
                             to_string(ckpt.meta.target));
  }
  const NoiseSchedule schedule = ckpt.meta.make_noise_schedule();
  TorchDenoiser model(ckpt.sampling_net(), ckpt.meta.timesteps);
  return run_single_case(record.subject_id, record.modality_paths, target, model, ckpt.meta,
                         schedule, options, nullptr);
}

ManifestSynthesisResult synthesize_manifest(const fs::path& dataset_root,
                                            const std::vector<PseudoValRecord>& manifest,
                                            const CheckpointRegistry& registry,
                                            const SynthesisOptions& options) {
  torch::set_num_threads(std::max(1, options.torch_threads));

  // Load each needed checkpoint once; threads share the read-only models.
  struct TargetModel {
    CheckpointMeta meta;
    NoiseSchedule schedule;
    std::unique_ptr<TorchDenoiser> model;
  };
  std::map<Modality, TargetModel> models;
  for (const auto& rec : manifest) {
    if (models.contains(rec.dropped)) continue;
    const auto it = registry.entries.find(rec.dropped);
    if (it == registry.entries.end() || !it->second.complete) {
      throw std::runtime_error("registry has no completed checkpoint for target modality " +
                               to_string(rec.dropped));
    }
    LoadedCheckpoint ckpt = load_checkpoint(it->second.checkpoint_path);
    TargetModel tm;
    tm.meta = ckpt.meta;
    tm.schedule = ckpt.meta.make_noise_schedule();
    tm.model = std::make_unique<TorchDenoiser>(ckpt.sampling_net(), ckpt.meta.timesteps);
    models.emplace(rec.dropped, std::move(tm));
  }

  fs::create_directories(options.out_dir);
  std::vector<CaseResult> results(manifest.size());
  std::vector<std::string> errors(manifest.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= manifest.size()) return;
      const auto& rec = manifest[i];
      try {
        const SubjectRecord subject =
            scan_case_dir(dataset_root / rec.subject_id, options.naming);
        std::map<Modality, fs::path> condition_paths;
        for (const auto& [m, path] : subject.modality_paths) {
          if (m != rec.dropped) condition_paths[m] = path;
        }
        if (condition_paths.size() != 3) {
          throw std::runtime_error("case " + rec.subject_id + " does not provide the 3 " +
                                   "conditioning modalities for dropped " +
                                   to_string(rec.dropped));
        }
        auto& tm = models.at(rec.dropped);
        results[i] = run_single_case(rec.subject_id, condition_paths, rec.dropped, *tm.model,
                                     tm.meta, tm.schedule, options, &log_mutex);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int n_workers = std::max(1, options.workers);
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  ManifestSynthesisResult out;
  for (size_t i = 0; i < manifest.size(); ++i) {
    if (!errors[i].empty()) {
      out.failures.emplace_back(manifest[i].subject_id, errors[i]);
    } else {
      out.done.push_back(results[i]);
    }
  }
  return out;
}

}  // namespace cwdm
