// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cwdm/volume_io.hpp"

namespace cwdm {

namespace {

void check_pair(const Volume3D& a, const Volume3D& b) {
  if (a.size() == 0) throw std::invalid_argument("metric on empty volume");
  if (a.shape != b.shape) {
    throw std::invalid_argument("metric shape mismatch: " + shape_to_string(a.shape) +
                                " vs " + shape_to_string(b.shape));
  }
}

}  // namespace

double mse(const Volume3D& a, const Volume3D& b) {
  check_pair(a, b);
  double acc = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    acc += d * d;
  }
  return acc / double(a.size());
}

double psnr(const Volume3D& a, const Volume3D& b, double data_range, double cap_db) {
  const double err = mse(a, b);
  if (err == 0.0) return cap_db;
  return 10.0 * std::log10(data_range * data_range / err);
}

namespace {

// Separable Gaussian filter along one axis, same-size output. Edges use
// renormalized truncated kernels; the SSIM map is cropped to the valid
// interior afterwards, so edge handling never reaches the score.
void gaussian_axis(const std::vector<double>& src, const Shape3& shape, int axis,
                   const std::vector<double>& kernel, std::vector<double>& dst) {
  const int radius = int(kernel.size() / 2);
  const int64_t dims[3] = {shape[0], shape[1], shape[2]};
  const int64_t strides[3] = {shape[1] * shape[2], shape[2], 1};
  const int64_t n = dims[axis];
  const int64_t stride = strides[axis];

  // Iterate over all lines along `axis`.
  int64_t outer_dims[2], outer_strides[2];
  int k = 0;
  for (int a = 0; a < 3; ++a) {
    if (a == axis) continue;
    outer_dims[k] = dims[a];
    outer_strides[k] = strides[a];
    ++k;
  }
  for (int64_t i = 0; i < outer_dims[0]; ++i) {
    for (int64_t j = 0; j < outer_dims[1]; ++j) {
      const int64_t base = i * outer_strides[0] + j * outer_strides[1];
      for (int64_t p = 0; p < n; ++p) {
        double acc = 0.0, wsum = 0.0;
        const int64_t lo = std::max<int64_t>(0, p - radius);
        const int64_t hi = std::min<int64_t>(n - 1, p + radius);
        for (int64_t q = lo; q <= hi; ++q) {
          const double w = kernel[q - p + radius];
          acc += w * src[base + q * stride];
          wsum += w;
        }
        dst[base + p * stride] = acc / wsum;
      }
    }
  }
}

void gaussian_filter3(std::vector<double>& field, const Shape3& shape,
                      const std::vector<double>& kernel, std::vector<double>& scratch) {
  gaussian_axis(field, shape, 0, kernel, scratch);
  gaussian_axis(scratch, shape, 1, kernel, field);
  gaussian_axis(field, shape, 2, kernel, scratch);
  field.swap(scratch);
}

std::vector<double> gaussian_kernel(int window, double sigma) {
  std::vector<double> k(window);
  const int radius = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - radius;
    k[i] = std::exp(-0.5 * x * x / (sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

double ssim(const Volume3D& a, const Volume3D& b, const SsimParams& params) {
  check_pair(a, b);
  if (params.window < 3 || params.window % 2 == 0) {
    throw std::invalid_argument("ssim: window size must be odd and >= 3");
  }
  const int radius = params.window / 2;
  for (int64_t extent : a.shape) {
    if (extent < params.window) {
      throw std::invalid_argument("ssim: volume extent " + std::to_string(extent) +
                                  " smaller than window " + std::to_string(params.window));
    }
  }

  const int64_t n = a.size();
  std::vector<double> mu_a(n), mu_b(n), aa(n), bb(n), ab(n), scratch(n);
  for (int64_t i = 0; i < n; ++i) {
    const double x = a.data[i], y = b.data[i];
    mu_a[i] = x;
    mu_b[i] = y;
    aa[i] = x * x;
    bb[i] = y * y;
    ab[i] = x * y;
  }
  const auto kernel = gaussian_kernel(params.window, params.sigma);
  gaussian_filter3(mu_a, a.shape, kernel, scratch);
  gaussian_filter3(mu_b, a.shape, kernel, scratch);
  gaussian_filter3(aa, a.shape, kernel, scratch);
  gaussian_filter3(bb, a.shape, kernel, scratch);
  gaussian_filter3(ab, a.shape, kernel, scratch);

  const double c1 = (params.k1 * params.data_range) * (params.k1 * params.data_range);
  const double c2 = (params.k2 * params.data_range) * (params.k2 * params.data_range);

  double acc = 0.0;
  int64_t count = 0;
  for (int64_t d = radius; d < a.shape[0] - radius; ++d) {
    for (int64_t h = radius; h < a.shape[1] - radius; ++h) {
      for (int64_t w = radius; w < a.shape[2] - radius; ++w) {
        const int64_t i = (d * a.shape[1] + h) * a.shape[2] + w;
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = aa[i] - ma * ma;
        const double vb = bb[i] - mb * mb;
        const double cov = ab[i] - ma * mb;
        const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        acc += num / den;
        ++count;
      }
    }
  }
  return acc / double(count);
}

std::string to_string(CropMode mode) {
  return mode == CropMode::full ? "full" : "cropped_224";
}

CropMode parse_crop_mode(const std::string& name) {
  if (name == "full") return CropMode::full;
  if (name == "cropped_224") return CropMode::cropped_224;
  throw std::invalid_argument("unknown crop mode '" + name + "' (expected full or cropped_224)");
}

Volume3D apply_crop(const Volume3D& v, CropMode mode) {
  if (mode == CropMode::full) return v;
  const Shape3 target = {155, 224, 224};
  Shape3 out_shape;
  Shape3 offset;
  for (int a = 0; a < 3; ++a) {
    out_shape[a] = std::min(v.shape[a], target[a]);
    offset[a] = (v.shape[a] - out_shape[a]) / 2;
  }
  if (out_shape == v.shape) return v;
  Volume3D out(out_shape);
  out.meta = v.meta;
  for (int64_t d = 0; d < out_shape[0]; ++d) {
    for (int64_t h = 0; h < out_shape[1]; ++h) {
      for (int64_t w = 0; w < out_shape[2]; ++w) {
        out.at(d, h, w) = v.at(d + offset[0], h + offset[1], w + offset[2]);
      }
    }
  }
  return out;
}

MetricsReport evaluate_split(const std::filesystem::path& predictions_dir,
                             const std::vector<PseudoValRecord>& manifest,
                             const NamingProfile& profile, const EvaluateOptions& options) {
  MetricsReport report;
  report.crop_mode = options.crop_mode;
  report.ssim_params = options.ssim_params;
  report.preprocessed_ground_truth = options.preprocess_ground_truth;

  for (const auto& rec : manifest) {
    const std::filesystem::path pred_path =
        predictions_dir / (rec.subject_id + "-" + profile.suffix_for(rec.dropped) + "." +
                           options.prediction_extension);
    if (!std::filesystem::exists(pred_path)) {
      report.missing_predictions.push_back(rec.subject_id);
      continue;
    }
    Volume3D pred = read_volume(pred_path);
    Volume3D truth = read_volume(rec.ground_truth_path);
    if (options.preprocess_ground_truth) {
      truth = preprocess_volume(truth, options.preprocess);
    }
    pred = apply_crop(pred, options.crop_mode);
    truth = apply_crop(truth, options.crop_mode);

    CaseMetrics cm;
    cm.case_id = rec.subject_id;
    cm.target = rec.dropped;
    cm.mse = mse(pred, truth);
    cm.psnr = psnr(pred, truth);
    cm.ssim = ssim(pred, truth, options.ssim_params);
    report.per_case.push_back(cm);
  }

  for (const auto& cm : report.per_case) {
    auto& agg = report.per_modality[cm.target];
    agg.cases += 1;
    agg.mse += cm.mse;
    agg.psnr += cm.psnr;
    agg.ssim += cm.ssim;
    report.overall.cases += 1;
    report.overall.mse += cm.mse;
    report.overall.psnr += cm.psnr;
    report.overall.ssim += cm.ssim;
  }
  auto finish = [](MetricsAggregate& agg) {
    if (agg.cases > 0) {
      agg.mse /= agg.cases;
      agg.psnr /= agg.cases;
      agg.ssim /= agg.cases;
    }
  };
  for (auto& [m, agg] : report.per_modality) finish(agg);
  finish(report.overall);
  return report;
}

std::string render_report_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[160];
  out << "# crop_mode=" << to_string(report.crop_mode)
      << " ssim(window=" << report.ssim_params.window << ", sigma=" << report.ssim_params.sigma
      << ", k1=" << report.ssim_params.k1 << ", k2=" << report.ssim_params.k2
      << ", data_range=" << report.ssim_params.data_range << ")"
      << " gt_normalized=" << (report.preprocessed_ground_truth ? "yes" : "no") << "\n";
  std::snprintf(line, sizeof(line), "%-18s %6s %12s %8s %8s\n", "Missing Modality", "Cases",
                "MSE", "PSNR", "SSIM");
  out << line;
  out << std::string(56, '-') << "\n";
  for (const auto& [m, agg] : report.per_modality) {
    std::snprintf(line, sizeof(line), "%-18s %6d %12.3e %8.2f %8.3f\n", to_string(m).c_str(),
                  agg.cases, agg.mse, agg.psnr, agg.ssim);
    out << line;
  }
  out << std::string(56, '-') << "\n";
  std::snprintf(line, sizeof(line), "%-18s %6d %12.3e %8.2f %8.3f\n", "Overall",
                report.overall.cases, report.overall.mse, report.overall.psnr,
                report.overall.ssim);
  out << line;
  for (const auto& id : report.missing_predictions) {
    out << "missing prediction: " << id << "\n";
  }
  return out.str();
}

void write_report_tsv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create " + path.string());
  f << "case_id\ttarget\tmse\tpsnr\tssim\n";
  char line[256];
  for (const auto& cm : report.per_case) {
    std::snprintf(line, sizeof(line), "%s\t%s\t%.9e\t%.6f\t%.6f\n", cm.case_id.c_str(),
                  to_string(cm.target).c_str(), cm.mse, cm.psnr, cm.ssim);
    f << line;
  }
  if (!f) throw std::runtime_error("short write to " + path.string());
}

}  // namespace cwdm
