#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "mrk/core/volume.hpp"

namespace mrk {

/// NIfTI-1 datatype codes handled by the reader and writer.
enum class NiftiType : std::int16_t {
  UInt8 = 2,
  Int16 = 4,
  Int32 = 8,
  Float32 = 16,
  Float64 = 64,
};

struct NiftiReadOptions {
  /// Also decode the voxels as a LabelMask (single channel, non-negative
  /// integers).
  bool as_labels = false;
  /// Class count for the mask; 0 means max label + 1 (at least 2).
  std::uint32_t num_classes = 0;
};

struct NiftiContents {
  Volume volume;
  std::optional<LabelMask> labels;
  NiftiType stored_type = NiftiType::Float32;
};

/// Reads a single-file NIfTI-1 image (.nii or gzip-compressed .nii.gz).
///
/// Voxels are converted to float32 after applying scl_slope/scl_inter.
/// Orientation comes from the sform when sform_code > 0, then the qform, and
/// finally a diagonal pixdim affine (with a warning).
NiftiContents read_nifti(const std::filesystem::path& path, const NiftiReadOptions& options = {});

/// Writes `volume` as `type` (float32 by default). Integer types require
/// every sample to be an integer in range. Gzip is used when the path ends
/// in ".gz".
void write_nifti(const Volume& volume, const std::filesystem::path& path,
                 NiftiType type = NiftiType::Float32);

/// Writes the mask as int16; labels above 32767 raise Overflow.
void write_nifti(const LabelMask& mask, const std::filesystem::path& path);

}  // namespace mrk
