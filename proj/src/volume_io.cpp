// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/volume_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace cwdm {

namespace {

// NIfTI-1 header, 348 bytes. Only the fields this adapter touches are used;
// the rest pass through via VolumeMeta::header_blob.
struct NiftiHeader {
  int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  int32_t extents;
  int16_t session_error;
  char regular;
  char dim_info;
  int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  int16_t intent_code;
  int16_t datatype;
  int16_t bitpix;
  int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  int16_t qform_code, sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4], srow_y[4], srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must pack to 348 bytes");

constexpr int16_t kDtUint8 = 2;
constexpr int16_t kDtInt16 = 4;
constexpr int16_t kDtInt32 = 8;
constexpr int16_t kDtFloat32 = 16;
constexpr int16_t kDtFloat64 = 64;
constexpr int16_t kDtUint16 = 512;

struct GzCloser {
  void operator()(gzFile f) const {
    if (f) gzclose(f);
  }
};
using GzPtr = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

void gz_read_exact(gzFile f, void* dst, size_t bytes, const std::filesystem::path& path) {
  size_t done = 0;
  auto* out = static_cast<char*>(dst);
  while (done < bytes) {
    const unsigned chunk =
        static_cast<unsigned>(std::min<size_t>(bytes - done, 1u << 30));
    const int got = gzread(f, out + done, chunk);
    if (got <= 0) {
      throw std::runtime_error("short read from " + path.string());
    }
    done += static_cast<size_t>(got);
  }
}

void gz_write_exact(gzFile f, const void* src, size_t bytes,
                    const std::filesystem::path& path) {
  size_t done = 0;
  const auto* in = static_cast<const char*>(src);
  while (done < bytes) {
    const unsigned chunk =
        static_cast<unsigned>(std::min<size_t>(bytes - done, 1u << 30));
    const int wrote = gzwrite(f, in + done, chunk);
    if (wrote <= 0) {
      throw std::runtime_error("short write to " + path.string());
    }
    done += static_cast<size_t>(wrote);
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename Src>
void convert_to_float(const std::vector<char>& raw, float slope, float inter,
                      std::vector<float>& out) {
  const auto* src = reinterpret_cast<const Src*>(raw.data());
  const bool rescale = slope != 0.0f && !(slope == 1.0f && inter == 0.0f);
  for (size_t i = 0; i < out.size(); ++i) {
    float v = static_cast<float>(src[i]);
    if (rescale) v = v * slope + inter;
    out[i] = v;
  }
}

Volume3D read_nifti(const std::filesystem::path& path) {
  GzPtr f(gzopen(path.string().c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open " + path.string());

  NiftiHeader hdr{};
  gz_read_exact(f.get(), &hdr, sizeof(hdr), path);
  if (hdr.sizeof_hdr != 348) {
    if (hdr.sizeof_hdr == 0x5C010000) {
      throw std::runtime_error(path.string() + ": big-endian NIfTI files are not supported");
    }
    throw std::runtime_error(path.string() + ": not a NIfTI-1 file (sizeof_hdr != 348)");
  }
  if (std::strncmp(hdr.magic, "n+1", 3) != 0 && std::strncmp(hdr.magic, "ni1", 3) != 0) {
    throw std::runtime_error(path.string() + ": missing NIfTI magic");
  }
  if (std::strncmp(hdr.magic, "ni1", 3) == 0) {
    throw std::runtime_error(path.string() + ": detached .hdr/.img pairs are not supported");
  }
  const int ndim = hdr.dim[0];
  bool shape_ok = ndim == 3;
  if (ndim >= 4) {
    shape_ok = true;
    for (int i = 4; i <= ndim; ++i) shape_ok = shape_ok && hdr.dim[i] <= 1;
  }
  if (!shape_ok) {
    throw std::runtime_error(path.string() + ": expected a single 3D volume, got dim[0]=" +
                             std::to_string(ndim));
  }

  Volume3D vol;
  // NIfTI stores x fastest; map (x, y, z) -> (W, H, D).
  vol.shape = {hdr.dim[3], hdr.dim[2], hdr.dim[1]};
  if (vol.shape[0] < 1 || vol.shape[1] < 1 || vol.shape[2] < 1) {
    throw std::runtime_error(path.string() + ": degenerate dimensions");
  }
  vol.meta.spacing = {hdr.pixdim[3], hdr.pixdim[2], hdr.pixdim[1]};
  vol.meta.header_blob.resize(sizeof(hdr));
  std::memcpy(vol.meta.header_blob.data(), &hdr, sizeof(hdr));

  const int64_t voxels = element_count(vol.shape);
  const int64_t offset = static_cast<int64_t>(hdr.vox_offset);
  if (offset < static_cast<int64_t>(sizeof(hdr))) {
    throw std::runtime_error(path.string() + ": invalid vox_offset");
  }
  // Skip the extension area between header and data.
  std::vector<char> skip(offset - sizeof(hdr));
  if (!skip.empty()) gz_read_exact(f.get(), skip.data(), skip.size(), path);

  const int bytes_per = hdr.bitpix / 8;
  std::vector<char> raw(static_cast<size_t>(voxels) * bytes_per);
  gz_read_exact(f.get(), raw.data(), raw.size(), path);

  vol.data.resize(voxels);
  switch (hdr.datatype) {
    case kDtUint8: convert_to_float<uint8_t>(raw, hdr.scl_slope, hdr.scl_inter, vol.data); break;
    case kDtInt16: convert_to_float<int16_t>(raw, hdr.scl_slope, hdr.scl_inter, vol.data); break;
    case kDtInt32: convert_to_float<int32_t>(raw, hdr.scl_slope, hdr.scl_inter, vol.data); break;
    case kDtUint16: convert_to_float<uint16_t>(raw, hdr.scl_slope, hdr.scl_inter, vol.data); break;
    case kDtFloat32: convert_to_float<float>(raw, hdr.scl_slope, hdr.scl_inter, vol.data); break;
    case kDtFloat64: convert_to_float<double>(raw, hdr.scl_slope, hdr.scl_inter, vol.data); break;
    default:
      throw std::runtime_error(path.string() + ": unsupported NIfTI datatype " +
                               std::to_string(hdr.datatype));
  }
  return vol;
}

void write_nifti(const std::filesystem::path& path, const Volume3D& vol, bool gzipped) {
  NiftiHeader hdr{};
  if (vol.meta.header_blob.size() == sizeof(hdr)) {
    std::memcpy(&hdr, vol.meta.header_blob.data(), sizeof(hdr));
  } else {
    hdr.sizeof_hdr = 348;
    hdr.regular = 'r';
    hdr.pixdim[0] = 1.0f;
    hdr.pixdim[1] = vol.meta.spacing[2];
    hdr.pixdim[2] = vol.meta.spacing[1];
    hdr.pixdim[3] = vol.meta.spacing[0];
    hdr.xyzt_units = 2;  // millimetres
    hdr.sform_code = 1;
    hdr.srow_x[0] = vol.meta.spacing[2];
    hdr.srow_y[1] = vol.meta.spacing[1];
    hdr.srow_z[2] = vol.meta.spacing[0];
    std::strncpy(hdr.descrip, "cwdm", sizeof(hdr.descrip) - 1);
  }
  hdr.dim[0] = 3;
  hdr.dim[1] = static_cast<int16_t>(vol.shape[2]);
  hdr.dim[2] = static_cast<int16_t>(vol.shape[1]);
  hdr.dim[3] = static_cast<int16_t>(vol.shape[0]);
  for (int i = 4; i < 8; ++i) hdr.dim[i] = 1;
  hdr.datatype = kDtFloat32;
  hdr.bitpix = 32;
  hdr.scl_slope = 1.0f;
  hdr.scl_inter = 0.0f;
  hdr.vox_offset = 352.0f;
  std::memcpy(hdr.magic, "n+1", 4);

  const char extension_flag[4] = {0, 0, 0, 0};

  if (gzipped) {
    GzPtr f(gzopen(path.string().c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot create " + path.string());
    gz_write_exact(f.get(), &hdr, sizeof(hdr), path);
    gz_write_exact(f.get(), extension_flag, sizeof(extension_flag), path);
    gz_write_exact(f.get(), vol.data.data(), vol.data.size() * sizeof(float), path);
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot create " + path.string());
    f.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
    f.write(extension_flag, sizeof(extension_flag));
    f.write(reinterpret_cast<const char*>(vol.data.data()), vol.data.size() * sizeof(float));
    if (!f) throw std::runtime_error("short write to " + path.string());
  }
}

constexpr char kRawMagic[8] = {'C', 'W', 'D', 'M', 'V', 'O', 'L', '1'};

Volume3D read_raw(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kRawMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + ": not a raw volume file");
  }
  int64_t dims[3];
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!f || dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw std::runtime_error(path.string() + ": corrupt raw volume dimensions");
  }
  Volume3D vol({dims[0], dims[1], dims[2]});
  f.read(reinterpret_cast<char*>(vol.data.data()), vol.data.size() * sizeof(float));
  if (!f) throw std::runtime_error(path.string() + ": truncated raw volume data");
  return vol;
}

void write_raw(const std::filesystem::path& path, const Volume3D& vol) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create " + path.string());
  f.write(kRawMagic, sizeof(kRawMagic));
  const int64_t dims[3] = {vol.shape[0], vol.shape[1], vol.shape[2]};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  f.write(reinterpret_cast<const char*>(vol.data.data()), vol.data.size() * sizeof(float));
  if (!f) throw std::runtime_error("short write to " + path.string());
}

}  // namespace

bool is_volume_file(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  return ends_with(name, ".nii.gz") || ends_with(name, ".nii") || ends_with(name, ".vol");
}

std::string volume_stem(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (const std::string ext : {".nii.gz", ".nii", ".vol"}) {
    if (ends_with(name, ext)) return name.substr(0, name.size() - ext.size());
  }
  return name;
}

Volume3D read_volume(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  if (ends_with(name, ".nii.gz") || ends_with(name, ".nii")) return read_nifti(path);
  if (ends_with(name, ".vol")) return read_raw(path);
  throw std::runtime_error("unsupported volume format: " + path.string());
}

void write_volume(const std::filesystem::path& path, const Volume3D& volume) {
  if (element_count(volume.shape) != volume.size()) {
    throw std::invalid_argument("write_volume: shape/data size mismatch");
  }
  const std::string name = path.filename().string();
  if (ends_with(name, ".nii.gz")) return write_nifti(path, volume, /*gzipped=*/true);
  if (ends_with(name, ".nii")) return write_nifti(path, volume, /*gzipped=*/false);
  if (ends_with(name, ".vol")) return write_raw(path, volume);
  throw std::runtime_error("unsupported volume format: " + path.string());
}

}  // namespace cwdm
