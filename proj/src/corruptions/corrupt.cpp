#include "mrk/corruptions/corrupt.hpp"

#include "mrk/core/error.hpp"

namespace mrk::corrupt {
namespace {

template <typename T>
const T& expect(const TransformParams& params, TransformKind kind) {
  const T* p = std::get_if<T>(&params);
  if (p == nullptr) {
    fail(ErrorCode::Config, "parameter set does not belong to transform {}", name(kind));
  }
  return *p;
}

GeometricResult plain(Volume v) { return {std::move(v), std::nullopt}; }

}  // namespace

GeometricResult apply_params(const Volume& volume, const LabelMask* labels, TransformKind kind,
                             const TransformParams& params, RngStream rng) {
  if (!moves_anatomy(kind)) labels = nullptr;
  switch (kind) {
    case TransformKind::ElasticDeformation: {
      const auto& p = expect<ElasticParams>(params, kind);
      return elastic_deform(volume, p.max_displacement_mm, p.control_points, rng, labels);
    }
    case TransformKind::IsoDownsample:
      return resample_geometric(volume, GeometricMode::IsoDownsample,
                                expect<DownsampleParams>(params, kind).factor, rng);
    case TransformKind::AnisoDownsample:
      return resample_geometric(volume, GeometricMode::AnisoDownsample,
                                expect<DownsampleParams>(params, kind).factor, rng);
    case TransformKind::BiasField: {
      const auto& p = expect<BiasFieldParams>(params, kind);
      return plain(bias_field(volume, p.magnitude, p.order, rng));
    }
    case TransformKind::ContrastCompression:
      return plain(intensity_map(volume, IntensityMode::GammaCompress,
                                 expect<GammaParams>(params, kind).gamma));
    case TransformKind::ContrastExpansion:
      return plain(intensity_map(volume, IntensityMode::GammaExpand,
                                 expect<GammaParams>(params, kind).gamma));
    case TransformKind::Ghosting: {
      const auto& p = expect<GhostingParams>(params, kind);
      return plain(ghosting(volume, p.num_ghosts, p.intensity));
    }
    case TransformKind::RandomMotion: {
      const auto& p = expect<MotionParams>(params, kind);
      return plain(random_motion(volume, p.num_movements, p.max_rotation_deg,
                                 p.max_translation_mm, rng));
    }
    case TransformKind::RicianNoise:
      return plain(rician_noise(volume, expect<RicianParams>(params, kind).sigma_fraction, rng));
    case TransformKind::Smoothing:
      return plain(intensity_map(volume, IntensityMode::Smooth,
                                 expect<SmoothingParams>(params, kind).sigma_mm));
    case TransformKind::Rotation:
      return resample_geometric(volume, GeometricMode::Rotate,
                                expect<RotationParams>(params, kind).degrees, rng, labels);
    case TransformKind::Scaling:
      return resample_geometric(volume, GeometricMode::Scale,
                                expect<ScalingParams>(params, kind).magnitude, rng, labels);
    case TransformKind::SpikeNoise: {
      const auto& p = expect<SpikeParams>(params, kind);
      return plain(spike_noise(volume, p.num_spikes, p.amplitude, rng, p.band_low, p.band_high));
    }
    case TransformKind::KSpaceSubsampling:
      return plain(kspace_subsample(volume, expect<SubsampleParams>(params, kind).keep_fraction));
  }
  fail(ErrorCode::InvalidArgument, "unknown transform kind");
}

GeometricResult apply_corruption(const Volume& volume, const LabelMask* labels, TransformKind kind,
                                 int severity, const SeverityConfig& config, RngStream rng) {
  return apply_params(volume, labels, kind, config.params(kind, severity), rng);
}

Volume apply_corruption(const Volume& volume, TransformKind kind, int severity,
                        const SeverityConfig& config, RngStream rng) {
  return apply_corruption(volume, nullptr, kind, severity, config, rng).volume;
}

RngStream corruption_stream(std::uint64_t seed, std::string_view case_id, TransformKind kind,
                            int severity) {
  return RngStream(seed)
      .derive(case_id)
      .derive(name(kind))
      .derive(static_cast<std::uint64_t>(severity));
}

}  // namespace mrk::corrupt
