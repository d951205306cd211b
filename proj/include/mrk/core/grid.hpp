#pragma once

#include <array>
#include <cstddef>

namespace mrk {

struct Dims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t voxels() const noexcept { return nx * ny * nz; }
  std::size_t operator[](std::size_t axis) const noexcept {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

using Vec3 = std::array<double, 3>;

/// Row-major 4x4 voxel-to-world matrix.
using Affine = std::array<double, 16>;

Affine diagonal_affine(const Vec3& spacing);

/// Sampling grid shared by volumes and masks: extent, voxel size in mm and
/// orientation.
struct Grid {
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  Affine affine = diagonal_affine({1.0, 1.0, 1.0});

  static Grid with_spacing(Dims dims, Vec3 spacing);

  std::size_t voxels() const noexcept { return dims.voxels(); }
  std::size_t slice_voxels() const noexcept { return dims.nx * dims.ny; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return (z * dims.ny + y) * dims.nx + x;
  }

  /// Throws Validation if dims are zero, spacing is not strictly positive or
  /// the affine's rotation/scale block is singular.
  void validate() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace mrk
