#include "mrk/corruptions/transform_kind.hpp"

namespace mrk::corrupt {
namespace {

struct Names {
  TransformKind kind;
  std::string_view camel;
  std::string_view snake;
};

constexpr std::array<Names, 14> kNames{{
    {TransformKind::ElasticDeformation, "ElasticDeformation", "elastic_deformation"},
    {TransformKind::IsoDownsample, "IsoDownsample", "iso_downsample"},
    {TransformKind::AnisoDownsample, "AnisoDownsample", "aniso_downsample"},
    {TransformKind::BiasField, "BiasField", "bias_field"},
    {TransformKind::ContrastCompression, "ContrastCompression", "contrast_compression"},
    {TransformKind::ContrastExpansion, "ContrastExpansion", "contrast_expansion"},
    {TransformKind::Ghosting, "Ghosting", "ghosting"},
    {TransformKind::RandomMotion, "RandomMotion", "random_motion"},
    {TransformKind::RicianNoise, "RicianNoise", "rician_noise"},
    {TransformKind::Smoothing, "Smoothing", "smoothing"},
    {TransformKind::Rotation, "Rotation", "rotation"},
    {TransformKind::Scaling, "Scaling", "scaling"},
    {TransformKind::SpikeNoise, "SpikeNoise", "spike_noise"},
    {TransformKind::KSpaceSubsampling, "KSpaceSubsampling", "kspace_subsampling"},
}};

const Names& lookup(TransformKind kind) {
  return kNames[static_cast<std::size_t>(kind)];
}

}  // namespace

std::string_view name(TransformKind kind) { return lookup(kind).camel; }

std::string_view key(TransformKind kind) { return lookup(kind).snake; }

std::optional<TransformKind> parse_transform_kind(std::string_view text) {
  for (const auto& n : kNames) {
    if (text == n.camel || text == n.snake) return n.kind;
  }
  return std::nullopt;
}

bool moves_anatomy(TransformKind kind) {
  return kind == TransformKind::Rotation || kind == TransformKind::Scaling ||
         kind == TransformKind::ElasticDeformation;
}

}  // namespace mrk::corrupt
