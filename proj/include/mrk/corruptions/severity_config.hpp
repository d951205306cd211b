#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <variant>

#include <nlohmann/json_fwd.hpp>

#include "mrk/corruptions/transform_kind.hpp"

namespace mrk::corrupt {

struct ElasticParams {
  double max_displacement_mm = 0.0;
  int control_points = 7;  // per axis
};

struct DownsampleParams {
  double factor = 1.0;
};

struct BiasFieldParams {
  double magnitude = 0.0;
  int order = 3;
};

struct GammaParams {
  double gamma = 1.0;
};

struct GhostingParams {
  int num_ghosts = 2;
  double intensity = 0.0;
};

struct MotionParams {
  int num_movements = 1;
  double max_rotation_deg = 0.0;
  double max_translation_mm = 0.0;
};

struct RicianParams {
  double sigma_fraction = 0.0;  // of the channel's 1st-99th percentile range
};

struct SmoothingParams {
  double sigma_mm = 0.0;
};

struct RotationParams {
  double degrees = 0.0;
};

struct ScalingParams {
  double magnitude = 0.0;  // zoom factor is 1 + magnitude or 1 / (1 + magnitude)
};

struct SpikeParams {
  int num_spikes = 1;
  double amplitude = 0.0;  // fraction of the slice's peak spectral magnitude
  double band_low = 0.1;   // spike radius bounds as fractions of Nyquist
  double band_high = 0.6;
};

struct SubsampleParams {
  double keep_fraction = 1.0;
};

using TransformParams =
    std::variant<ElasticParams, DownsampleParams, BiasFieldParams, GammaParams, GhostingParams,
                 MotionParams, RicianParams, SmoothingParams, RotationParams, ScalingParams,
                 SpikeParams, SubsampleParams>;

using SeverityLevels = std::array<TransformParams, 5>;

/// Parameter table: five severity levels per transform.
///
/// JSON form: {"version": 1, "<TransformName>": [{...}, x5], ...}. Levels
/// must be monotone in the parameter that controls distortion strength.
class SeverityConfig {
 public:
  static constexpr int kSchemaVersion = 1;

  SeverityConfig() = default;

  /// Compiled-in defaults for all fourteen transforms.
  static SeverityConfig defaults();
  static SeverityConfig from_json(const nlohmann::json& doc);
  static SeverityConfig load(const std::filesystem::path& path);

  nlohmann::json to_json() const;

  /// Validates and stores the five levels for `kind`.
  void set(TransformKind kind, const SeverityLevels& levels);
  /// Sets all five levels to the same parameters (validation allows ties).
  void set_uniform(TransformKind kind, const TransformParams& params);

  bool contains(TransformKind kind) const { return table_.contains(kind); }
  /// Throws InvalidArgument for severity outside 1..5 and Config when the
  /// transform is missing.
  const TransformParams& params(TransformKind kind, int severity) const;

  /// FNV-1a hash of the canonical JSON dump, recorded in run manifests.
  std::uint64_t hash() const;

 private:
  std::map<TransformKind, SeverityLevels> table_;
};

}  // namespace mrk::corrupt
