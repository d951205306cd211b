#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace mrk::corrupt {

/// The fourteen test-time image variations.
enum class TransformKind {
  ElasticDeformation,
  IsoDownsample,
  AnisoDownsample,
  BiasField,
  ContrastCompression,
  ContrastExpansion,
  Ghosting,
  RandomMotion,
  RicianNoise,
  Smoothing,
  Rotation,
  Scaling,
  SpikeNoise,
  KSpaceSubsampling,
};

inline constexpr std::array<TransformKind, 14> kAllTransforms{
    TransformKind::ElasticDeformation,  TransformKind::IsoDownsample,
    TransformKind::AnisoDownsample,     TransformKind::BiasField,
    TransformKind::ContrastCompression, TransformKind::ContrastExpansion,
    TransformKind::Ghosting,            TransformKind::RandomMotion,
    TransformKind::RicianNoise,         TransformKind::Smoothing,
    TransformKind::Rotation,            TransformKind::Scaling,
    TransformKind::SpikeNoise,          TransformKind::KSpaceSubsampling,
};

inline constexpr int kMinSeverity = 1;
inline constexpr int kMaxSeverity = 5;

/// CamelCase name used for output directories, config keys and trend CSVs.
std::string_view name(TransformKind kind);

/// snake_case name accepted on the command line.
std::string_view key(TransformKind kind);

/// Accepts either spelling.
std::optional<TransformKind> parse_transform_kind(std::string_view text);

/// Transforms that move anatomy; their label masks are resampled alongside.
bool moves_anatomy(TransformKind kind);

}  // namespace mrk::corrupt
