// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "cwdm/volume.hpp"

namespace cwdm {

// Narrow file adapter: NIfTI-1 (.nii / .nii.gz) for real datasets, plus a
// trivial raw container (.vol) for tests. Everything else in the codebase
// sees only Volume3D.

/// True if the filename ends in a supported volume extension.
bool is_volume_file(const std::filesystem::path& path);

/// Strips a supported volume extension ("case-t1n.nii.gz" -> "case-t1n").
std::string volume_stem(const std::filesystem::path& path);

Volume3D read_volume(const std::filesystem::path& path);

/// Writes by extension. NIfTI output is always float32; when the volume was
/// read from a NIfTI file its original header (orientation, spacing) is
/// carried over.
void write_volume(const std::filesystem::path& path, const Volume3D& volume);

}  // namespace cwdm
