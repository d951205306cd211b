#pragma once

#include <array>
#include <variant>
#include <vector>

#include "mrk/core/rng.hpp"
#include "mrk/core/volume.hpp"

namespace mrk::corrupt {

/// Source index = matrix * (x, y, z, 1), row-major 3x4, in voxel units.
struct AffineWarp {
  std::array<double, 12> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};

  Vec3 source(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    const double fx = static_cast<double>(x);
    const double fy = static_cast<double>(y);
    const double fz = static_cast<double>(z);
    return {m[0] * fx + m[1] * fy + m[2] * fz + m[3], m[4] * fx + m[5] * fy + m[6] * fz + m[7],
            m[8] * fx + m[9] * fy + m[10] * fz + m[11]};
  }
};

/// Dense per-voxel displacement, in voxel units, added to the output index.
struct DisplacementWarp {
  Dims dims;
  std::vector<float> dx, dy, dz;

  Vec3 source(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    const std::size_t i = (z * dims.ny + y) * dims.nx + x;
    return {static_cast<double>(x) + dx[i], static_cast<double>(y) + dy[i],
            static_cast<double>(z) + dz[i]};
  }
};

using Warp = std::variant<AffineWarp, DisplacementWarp>;

/// What to do when a source position lies more than half a voxel outside
/// the grid.
enum class FillMode {
  Clamp,           // sample the nearest edge voxel
  ChannelMinimum,  // image: channel minimum; labels: background
};

/// Trilinear resampling of every channel.
Volume warp_volume(const Volume& volume, const Warp& warp, FillMode fill);

/// Nearest-neighbour resampling.
LabelMask warp_labels(const LabelMask& mask, const Warp& warp, FillMode fill);

/// Trilinear resampling of each class plane followed by per-voxel
/// renormalization; out-of-field voxels become background.
ProbMask warp_probs(const ProbMask& probs, const Warp& warp, FillMode fill);

/// In-plane rotation by `degrees` about the slice centre, computed in
/// physical (mm) coordinates so anisotropic pixels rotate correctly.
AffineWarp rotation_warp(const Grid& grid, double degrees);

/// In-plane zoom about the slice centre; zoom > 1 magnifies.
AffineWarp zoom_warp(const Grid& grid, double zoom);

/// In-plane rigid motion: rotation about the slice centre followed by a
/// translation in mm.
AffineWarp rigid_warp(const Grid& grid, double degrees, double tx_mm, double ty_mm);

/// Mirror along one axis.
AffineWarp flip_warp(const Grid& grid, int axis);

/// Random displacements Uniform(-max_disp, max_disp) mm on a control grid of
/// `control_points` per axis, trilinearly interpolated to every voxel.
DisplacementWarp elastic_warp(const Grid& grid, double max_displacement_mm, int control_points,
                              RngStream rng);

/// Linear down-then-up resampling along each axis by the given factors
/// (1 leaves an axis untouched). The grid is preserved.
Volume downsample_restore(const Volume& volume, const Vec3& factors);

}  // namespace mrk::corrupt
