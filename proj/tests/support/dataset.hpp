#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mrk/core/nifti.hpp"
#include "support/phantom.hpp"

namespace mrk::test {

// Writes <dir>/<id>.nii.gz with <dir>/<id>_gt.nii.gz for each id.
inline void write_phantom_cases(const std::filesystem::path& dir, const std::vector<std::string>& ids,
                                std::size_t nx, std::size_t ny, std::size_t nz) {
  std::filesystem::create_directories(dir);
  std::uint32_t seed = 11;
  for (const auto& id : ids) {
    const auto ph = cardiac_phantom(nx, ny, nz, seed++);
    write_nifti(ph.image, dir / (id + ".nii.gz"));
    write_nifti(ph.labels, dir / (id + "_gt.nii.gz"));
  }
}

// Labels of `mask` with every voxel of `from` relabelled as background,
// from the first `count` voxels in raster order.
inline LabelMask erode_label(const LabelMask& mask, std::uint32_t from, std::size_t count) {
  std::vector<std::uint32_t> data(mask.labels().begin(), mask.labels().end());
  for (auto& v : data) {
    if (count == 0) break;
    if (v == from) {
      v = 0;
      --count;
    }
  }
  return LabelMask(mask.grid(), std::move(data), mask.num_classes());
}

}  // namespace mrk::test
