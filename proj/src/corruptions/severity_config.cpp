#include "mrk/corruptions/severity_config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mrk/core/error.hpp"

namespace mrk::corrupt {
namespace {

using nlohmann::json;

template <typename T>
T field(const json& obj, const char* name, T fallback, bool required, std::string_view kind) {
  if (!obj.contains(name)) {
    if (required) fail(ErrorCode::Config, "{}: parameter object lacks '{}'", kind, name);
    return fallback;
  }
  try {
    return obj.at(name).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "{}: parameter '{}' has the wrong type ({})", kind, name, e.what());
  }
}

TransformParams parse_params(TransformKind kind, const json& obj) {
  const auto n = name(kind);
  if (!obj.is_object()) fail(ErrorCode::Config, "{}: severity entry is not an object", n);
  switch (kind) {
    case TransformKind::ElasticDeformation:
      return ElasticParams{field(obj, "max_displacement_mm", 0.0, true, n),
                           field(obj, "control_points", 7, false, n)};
    case TransformKind::IsoDownsample:
    case TransformKind::AnisoDownsample:
      return DownsampleParams{field(obj, "factor", 1.0, true, n)};
    case TransformKind::BiasField:
      return BiasFieldParams{field(obj, "magnitude", 0.0, true, n), field(obj, "order", 3, false, n)};
    case TransformKind::ContrastCompression:
    case TransformKind::ContrastExpansion:
      return GammaParams{field(obj, "gamma", 1.0, true, n)};
    case TransformKind::Ghosting:
      return GhostingParams{field(obj, "num_ghosts", 2, true, n), field(obj, "intensity", 0.0, true, n)};
    case TransformKind::RandomMotion:
      return MotionParams{field(obj, "num_movements", 1, true, n),
                          field(obj, "max_rotation_deg", 0.0, true, n),
                          field(obj, "max_translation_mm", 0.0, true, n)};
    case TransformKind::RicianNoise:
      return RicianParams{field(obj, "sigma_fraction", 0.0, true, n)};
    case TransformKind::Smoothing:
      return SmoothingParams{field(obj, "sigma_mm", 0.0, true, n)};
    case TransformKind::Rotation:
      return RotationParams{field(obj, "degrees", 0.0, true, n)};
    case TransformKind::Scaling:
      return ScalingParams{field(obj, "magnitude", 0.0, true, n)};
    case TransformKind::SpikeNoise:
      return SpikeParams{field(obj, "num_spikes", 1, false, n), field(obj, "amplitude", 0.0, true, n),
                         field(obj, "band_low", 0.1, false, n), field(obj, "band_high", 0.6, false, n)};
    case TransformKind::KSpaceSubsampling:
      return SubsampleParams{field(obj, "keep_fraction", 1.0, true, n)};
  }
  fail(ErrorCode::Config, "unknown transform");
}

json params_to_json(const TransformParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ElasticParams>) {
          return {{"max_displacement_mm", p.max_displacement_mm}, {"control_points", p.control_points}};
        } else if constexpr (std::is_same_v<P, DownsampleParams>) {
          return {{"factor", p.factor}};
        } else if constexpr (std::is_same_v<P, BiasFieldParams>) {
          return {{"magnitude", p.magnitude}, {"order", p.order}};
        } else if constexpr (std::is_same_v<P, GammaParams>) {
          return {{"gamma", p.gamma}};
        } else if constexpr (std::is_same_v<P, GhostingParams>) {
          return {{"num_ghosts", p.num_ghosts}, {"intensity", p.intensity}};
        } else if constexpr (std::is_same_v<P, MotionParams>) {
          return {{"num_movements", p.num_movements},
                  {"max_rotation_deg", p.max_rotation_deg},
                  {"max_translation_mm", p.max_translation_mm}};
        } else if constexpr (std::is_same_v<P, RicianParams>) {
          return {{"sigma_fraction", p.sigma_fraction}};
        } else if constexpr (std::is_same_v<P, SmoothingParams>) {
          return {{"sigma_mm", p.sigma_mm}};
        } else if constexpr (std::is_same_v<P, RotationParams>) {
          return {{"degrees", p.degrees}};
        } else if constexpr (std::is_same_v<P, ScalingParams>) {
          return {{"magnitude", p.magnitude}};
        } else if constexpr (std::is_same_v<P, SpikeParams>) {
          return {{"num_spikes", p.num_spikes},
                  {"amplitude", p.amplitude},
                  {"band_low", p.band_low},
                  {"band_high", p.band_high}};
        } else {
          return {{"keep_fraction", p.keep_fraction}};
        }
      },
      params);
}

template <typename P>
const P& expect(TransformKind kind, const TransformParams& params) {
  if (const auto* p = std::get_if<P>(&params)) return *p;
  fail(ErrorCode::Config, "{}: parameter set has the wrong type", name(kind));
}

void require(bool ok, TransformKind kind, std::string_view what) {
  if (!ok) fail(ErrorCode::Config, "{}: {}", name(kind), what);
}

// Checks one level's ranges and returns the value(s) that must be monotone
// across levels, oriented so that larger means stronger distortion.
std::vector<double> check_level(TransformKind kind, const TransformParams& params) {
  switch (kind) {
    case TransformKind::ElasticDeformation: {
      const auto& p = expect<ElasticParams>(kind, params);
      require(p.max_displacement_mm >= 0.0, kind, "max_displacement_mm must be >= 0");
      require(p.control_points >= 2, kind, "control_points must be >= 2");
      return {p.max_displacement_mm};
    }
    case TransformKind::IsoDownsample:
    case TransformKind::AnisoDownsample: {
      const auto& p = expect<DownsampleParams>(kind, params);
      require(p.factor >= 1.0, kind, "factor must be >= 1");
      return {p.factor};
    }
    case TransformKind::BiasField: {
      const auto& p = expect<BiasFieldParams>(kind, params);
      require(p.magnitude >= 0.0, kind, "magnitude must be >= 0");
      require(p.order >= 1 && p.order <= 8, kind, "order must be in 1..8");
      return {p.magnitude};
    }
    case TransformKind::ContrastCompression: {
      const auto& p = expect<GammaParams>(kind, params);
      require(p.gamma > 0.0 && p.gamma <= 1.0, kind, "gamma must be in (0, 1]");
      return {-p.gamma};
    }
    case TransformKind::ContrastExpansion: {
      const auto& p = expect<GammaParams>(kind, params);
      require(p.gamma >= 1.0, kind, "gamma must be >= 1");
      return {p.gamma};
    }
    case TransformKind::Ghosting: {
      const auto& p = expect<GhostingParams>(kind, params);
      require(p.num_ghosts >= 1, kind, "num_ghosts must be >= 1");
      require(p.intensity >= 0.0 && p.intensity <= 1.0, kind, "intensity must be in [0, 1]");
      return {p.intensity};
    }
    case TransformKind::RandomMotion: {
      const auto& p = expect<MotionParams>(kind, params);
      require(p.num_movements >= 1, kind, "num_movements must be >= 1");
      require(p.max_rotation_deg >= 0.0 && p.max_rotation_deg <= 90.0, kind,
              "max_rotation_deg must be in [0, 90]");
      require(p.max_translation_mm >= 0.0, kind, "max_translation_mm must be >= 0");
      return {static_cast<double>(p.num_movements), p.max_rotation_deg, p.max_translation_mm};
    }
    case TransformKind::RicianNoise: {
      const auto& p = expect<RicianParams>(kind, params);
      require(p.sigma_fraction >= 0.0, kind, "sigma_fraction must be >= 0");
      return {p.sigma_fraction};
    }
    case TransformKind::Smoothing: {
      const auto& p = expect<SmoothingParams>(kind, params);
      require(p.sigma_mm >= 0.0, kind, "sigma_mm must be >= 0");
      return {p.sigma_mm};
    }
    case TransformKind::Rotation: {
      const auto& p = expect<RotationParams>(kind, params);
      require(p.degrees >= 0.0 && p.degrees <= 90.0, kind, "degrees must be in [0, 90]");
      return {p.degrees};
    }
    case TransformKind::Scaling: {
      const auto& p = expect<ScalingParams>(kind, params);
      require(p.magnitude >= 0.0 && p.magnitude < 1.0, kind, "magnitude must be in [0, 1)");
      return {p.magnitude};
    }
    case TransformKind::SpikeNoise: {
      const auto& p = expect<SpikeParams>(kind, params);
      require(p.num_spikes >= 1, kind, "num_spikes must be >= 1");
      require(p.amplitude >= 0.0, kind, "amplitude must be >= 0");
      require(p.band_low > 0.0 && p.band_low < p.band_high && p.band_high <= 1.5, kind,
              "band must satisfy 0 < band_low < band_high <= 1.5");
      return {p.amplitude};
    }
    case TransformKind::KSpaceSubsampling: {
      const auto& p = expect<SubsampleParams>(kind, params);
      require(p.keep_fraction > 0.0 && p.keep_fraction <= 1.0, kind,
              "keep_fraction must be in (0, 1]");
      return {-p.keep_fraction};
    }
  }
  return {};
}

}  // namespace

SeverityConfig SeverityConfig::defaults() {
  SeverityConfig cfg;
  cfg.set(TransformKind::RicianNoise, {RicianParams{0.02}, RicianParams{0.04}, RicianParams{0.07},
                                       RicianParams{0.10}, RicianParams{0.15}});
  cfg.set(TransformKind::Smoothing, {SmoothingParams{0.5}, SmoothingParams{1.0}, SmoothingParams{1.5},
                                     SmoothingParams{2.0}, SmoothingParams{3.0}});
  cfg.set(TransformKind::BiasField,
          {BiasFieldParams{0.1, 3}, BiasFieldParams{0.2, 3}, BiasFieldParams{0.35, 3},
           BiasFieldParams{0.5, 3}, BiasFieldParams{0.7, 3}});
  cfg.set(TransformKind::Ghosting,
          {GhostingParams{2, 0.2}, GhostingParams{3, 0.35}, GhostingParams{4, 0.5},
           GhostingParams{5, 0.65}, GhostingParams{6, 0.8}});
  cfg.set(TransformKind::SpikeNoise,
          {SpikeParams{1, 0.10}, SpikeParams{1, 0.20}, SpikeParams{1, 0.35}, SpikeParams{1, 0.50},
           SpikeParams{1, 0.75}});
  cfg.set(TransformKind::KSpaceSubsampling,
          {SubsampleParams{0.9}, SubsampleParams{0.75}, SubsampleParams{0.6}, SubsampleParams{0.45},
           SubsampleParams{0.3}});
  cfg.set(TransformKind::IsoDownsample,
          {DownsampleParams{1.25}, DownsampleParams{1.5}, DownsampleParams{2.0},
           DownsampleParams{2.5}, DownsampleParams{3.0}});
  cfg.set(TransformKind::AnisoDownsample,
          {DownsampleParams{1.5}, DownsampleParams{2.0}, DownsampleParams{3.0},
           DownsampleParams{4.0}, DownsampleParams{5.0}});
  cfg.set(TransformKind::ContrastCompression, {GammaParams{0.8}, GammaParams{0.65}, GammaParams{0.5},
                                               GammaParams{0.4}, GammaParams{0.3}});
  cfg.set(TransformKind::ContrastExpansion, {GammaParams{1.25}, GammaParams{1.5}, GammaParams{2.0},
                                             GammaParams{2.5}, GammaParams{3.3}});
  cfg.set(TransformKind::ElasticDeformation,
          {ElasticParams{2, 7}, ElasticParams{4, 7}, ElasticParams{6, 7}, ElasticParams{9, 7},
           ElasticParams{12, 7}});
  cfg.set(TransformKind::Rotation, {RotationParams{3}, RotationParams{7}, RotationParams{12},
                                    RotationParams{20}, RotationParams{30}});
  cfg.set(TransformKind::Scaling, {ScalingParams{0.05}, ScalingParams{0.10}, ScalingParams{0.15},
                                   ScalingParams{0.22}, ScalingParams{0.30}});
  cfg.set(TransformKind::RandomMotion,
          {MotionParams{1, 2, 2}, MotionParams{2, 4, 3}, MotionParams{2, 6, 5}, MotionParams{3, 8, 7},
           MotionParams{3, 10, 10}});
  return cfg;
}

void SeverityConfig::set(TransformKind kind, const SeverityLevels& levels) {
  std::vector<double> previous;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto strength = check_level(kind, levels[i]);
    for (std::size_t j = 0; j < previous.size(); ++j) {
      if (strength[j] < previous[j]) {
        fail(ErrorCode::Config, "{}: severity {} is weaker than severity {}", name(kind), i + 1, i);
      }
    }
    previous = std::move(strength);
  }
  table_[kind] = levels;
}

void SeverityConfig::set_uniform(TransformKind kind, const TransformParams& params) {
  set(kind, {params, params, params, params, params});
}

const TransformParams& SeverityConfig::params(TransformKind kind, int severity) const {
  if (severity < kMinSeverity || severity > kMaxSeverity) {
    fail(ErrorCode::InvalidArgument, "severity {} outside 1..5", severity);
  }
  const auto it = table_.find(kind);
  if (it == table_.end()) {
    fail(ErrorCode::Config, "severity configuration has no entry for {}", name(kind));
  }
  return it->second[static_cast<std::size_t>(severity - 1)];
}

SeverityConfig SeverityConfig::from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::Config, "severity configuration must be a JSON object");
  if (!doc.contains("version")) fail(ErrorCode::Config, "severity configuration lacks 'version'");
  if (doc.at("version") != kSchemaVersion) {
    fail(ErrorCode::Config, "unsupported severity configuration version {}", doc.at("version").dump());
  }
  SeverityConfig cfg;
  for (const auto& [k, value] : doc.items()) {
    if (k == "version") continue;
    const auto kind = parse_transform_kind(k);
    if (!kind) fail(ErrorCode::Config, "unknown transform '{}' in severity configuration", k);
    if (!value.is_array() || value.size() != 5) {
      fail(ErrorCode::Config, "{}: expected an array of exactly 5 parameter objects", k);
    }
    SeverityLevels levels;
    for (std::size_t i = 0; i < 5; ++i) levels[i] = parse_params(*kind, value[i]);
    cfg.set(*kind, levels);
  }
  return cfg;
}

SeverityConfig SeverityConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open severity configuration '{}'", path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "'{}' is not valid JSON: {}", path.string(), e.what());
  }
  return from_json(doc);
}

json SeverityConfig::to_json() const {
  json doc = json::object();
  doc["version"] = kSchemaVersion;
  for (const auto& [kind, levels] : table_) {
    json arr = json::array();
    for (const auto& level : levels) arr.push_back(params_to_json(level));
    doc[std::string(name(kind))] = std::move(arr);
  }
  return doc;
}

std::uint64_t SeverityConfig::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace mrk::corrupt
