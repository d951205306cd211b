#include <cmath>

#include "mrk/core/error.hpp"
#include "mrk/corruptions/operations.hpp"

namespace mrk::corrupt {
namespace {

GeometricResult warp_with_labels(const Volume& volume, const Warp& warp, FillMode fill,
                                 const LabelMask* labels) {
  GeometricResult out{warp_volume(volume, warp, fill), std::nullopt};
  if (labels != nullptr) {
    if (!(labels->grid().dims == volume.dims())) {
      fail(ErrorCode::GridMismatch, "label mask grid does not match the image");
    }
    out.labels = warp_labels(*labels, warp, fill);
  }
  return out;
}

}  // namespace

GeometricResult resample_geometric(const Volume& volume, GeometricMode mode, double param,
                                   RngStream rng, const LabelMask* labels) {
  if (!std::isfinite(param)) fail(ErrorCode::InvalidArgument, "geometric parameter must be finite");
  switch (mode) {
    case GeometricMode::IsoDownsample:
    case GeometricMode::AnisoDownsample: {
      if (param < 1.0) {
        fail(ErrorCode::InvalidArgument, "downsampling factor must be >= 1, got {}", param);
      }
      Vec3 factors{param, param, 1.0};
      if (mode == GeometricMode::AnisoDownsample) {
        const auto axis = rng.below(2);
        factors = {1.0, 1.0, 1.0};
        factors[axis] = param;
      }
      return {downsample_restore(volume, factors), std::nullopt};
    }
    case GeometricMode::Rotate: {
      if (std::abs(param) > 90.0) {
        fail(ErrorCode::InvalidArgument, "rotation must be within [-90, 90] degrees, got {}", param);
      }
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      return warp_with_labels(volume, rotation_warp(volume.grid(), sign * param),
                              FillMode::ChannelMinimum, labels);
    }
    case GeometricMode::Scale: {
      if (param < 0.0) {
        fail(ErrorCode::InvalidArgument, "scaling magnitude must be >= 0, got {}", param);
      }
      const double zoom = rng.bernoulli(0.5) ? 1.0 + param : 1.0 / (1.0 + param);
      return warp_with_labels(volume, zoom_warp(volume.grid(), zoom), FillMode::ChannelMinimum,
                              labels);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown geometric mode");
}

GeometricResult elastic_deform(const Volume& volume, double max_displacement_mm,
                               int control_points, RngStream rng, const LabelMask* labels) {
  const DisplacementWarp warp =
      elastic_warp(volume.grid(), max_displacement_mm, control_points, rng);
  return warp_with_labels(volume, warp, FillMode::Clamp, labels);
}

}  // namespace mrk::corrupt
