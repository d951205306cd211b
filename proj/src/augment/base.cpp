#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mrk/augment/augment.hpp"
#include "mrk/core/error.hpp"
#include "mrk/core/stats.hpp"

namespace mrk::augment {

using nlohmann::json;

namespace {

void read_field(const json& obj, const char* group, const char* name, double& value) {
  if (!obj.contains(name)) return;
  try {
    value = obj.at(name).get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "augmentation '{}.{}' is not a number ({})", group, name, e.what());
  }
}

const json* group_of(const json& doc, const char* group) {
  if (!doc.contains(group)) return nullptr;
  const json& g = doc.at(group);
  if (!g.is_object()) fail(ErrorCode::Config, "augmentation group '{}' is not an object", group);
  return &g;
}

void check_p(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::Config, "probability of {} must be in [0, 1], got {}", what, p);
  }
}

void check_range(double lo, double hi, const char* what, bool positive) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi) || (positive && !(lo > 0.0))) {
    fail(ErrorCode::Config, "invalid {} range [{}, {}]", what, lo, hi);
  }
}

// Composition: source of `outer` evaluated at the source of `inner`.
corrupt::AffineWarp compose(const corrupt::AffineWarp& outer, const corrupt::AffineWarp& inner) {
  corrupt::AffineWarp w;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      double v = c == 3 ? outer.m[r * 4 + 3] : 0.0;
      for (int k = 0; k < 3; ++k) v += outer.m[r * 4 + k] * inner.m[k * 4 + c];
      w.m[r * 4 + c] = v;
    }
  }
  return w;
}

Volume map_channels(const Volume& v, auto&& fn) {
  const std::size_t n = v.channel_size();
  std::vector<float> out(v.data().size());
  for (std::size_t c = 0; c < v.channels(); ++c) {
    const auto plane = v.channel(c);
    fn(plane, std::span<float>(out).subspan(c * n, n), c);
  }
  return v.with_data(std::move(out));
}

}  // namespace

AugmentConfig AugmentConfig::disabled() {
  AugmentConfig cfg;
  cfg.rotation.p = 0.0;
  cfg.scaling.p = 0.0;
  cfg.noise.p = 0.0;
  cfg.blur.p = 0.0;
  cfg.brightness.p = 0.0;
  cfg.contrast.p = 0.0;
  cfg.low_resolution.p = 0.0;
  cfg.gamma.p = 0.0;
  cfg.mirror.p = {0.0, 0.0, 0.0};
  return cfg;
}

AugmentConfig AugmentConfig::from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::Config, "augmentation config must be a JSON object");
  AugmentConfig cfg;
  if (const json* g = group_of(doc, "rotation")) {
    read_field(*g, "rotation", "p", cfg.rotation.p);
    read_field(*g, "rotation", "max_degrees", cfg.rotation.max_degrees);
  }
  if (const json* g = group_of(doc, "scaling")) {
    read_field(*g, "scaling", "p", cfg.scaling.p);
    read_field(*g, "scaling", "min_zoom", cfg.scaling.min_zoom);
    read_field(*g, "scaling", "max_zoom", cfg.scaling.max_zoom);
  }
  if (const json* g = group_of(doc, "noise")) {
    read_field(*g, "noise", "p", cfg.noise.p);
    read_field(*g, "noise", "max_variance", cfg.noise.max_variance);
  }
  if (const json* g = group_of(doc, "blur")) {
    read_field(*g, "blur", "p", cfg.blur.p);
    read_field(*g, "blur", "min_sigma", cfg.blur.min_sigma);
    read_field(*g, "blur", "max_sigma", cfg.blur.max_sigma);
  }
  if (const json* g = group_of(doc, "brightness")) {
    read_field(*g, "brightness", "p", cfg.brightness.p);
    read_field(*g, "brightness", "min_factor", cfg.brightness.min_factor);
    read_field(*g, "brightness", "max_factor", cfg.brightness.max_factor);
  }
  if (const json* g = group_of(doc, "contrast")) {
    read_field(*g, "contrast", "p", cfg.contrast.p);
    read_field(*g, "contrast", "min_factor", cfg.contrast.min_factor);
    read_field(*g, "contrast", "max_factor", cfg.contrast.max_factor);
  }
  if (const json* g = group_of(doc, "low_resolution")) {
    read_field(*g, "low_resolution", "p", cfg.low_resolution.p);
    read_field(*g, "low_resolution", "min_zoom", cfg.low_resolution.min_zoom);
    read_field(*g, "low_resolution", "max_zoom", cfg.low_resolution.max_zoom);
  }
  if (const json* g = group_of(doc, "gamma")) {
    read_field(*g, "gamma", "p", cfg.gamma.p);
    read_field(*g, "gamma", "min_gamma", cfg.gamma.min_gamma);
    read_field(*g, "gamma", "max_gamma", cfg.gamma.max_gamma);
  }
  if (const json* g = group_of(doc, "mirror"); g && g->contains("p")) {
    try {
      cfg.mirror.p = g->at("p").get<std::array<double, 3>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, "augmentation 'mirror.p' must be three numbers ({})", e.what());
    }
  }
  cfg.validate();
  return cfg;
}

AugmentConfig AugmentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open augmentation configuration '{}'", path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "'{}' is not valid JSON: {}", path.string(), e.what());
  }
  return from_json(doc);
}

json AugmentConfig::to_json() const {
  return {
      {"rotation", {{"p", rotation.p}, {"max_degrees", rotation.max_degrees}}},
      {"scaling", {{"p", scaling.p}, {"min_zoom", scaling.min_zoom}, {"max_zoom", scaling.max_zoom}}},
      {"noise", {{"p", noise.p}, {"max_variance", noise.max_variance}}},
      {"blur", {{"p", blur.p}, {"min_sigma", blur.min_sigma}, {"max_sigma", blur.max_sigma}}},
      {"brightness",
       {{"p", brightness.p}, {"min_factor", brightness.min_factor}, {"max_factor", brightness.max_factor}}},
      {"contrast",
       {{"p", contrast.p}, {"min_factor", contrast.min_factor}, {"max_factor", contrast.max_factor}}},
      {"low_resolution",
       {{"p", low_resolution.p}, {"min_zoom", low_resolution.min_zoom}, {"max_zoom", low_resolution.max_zoom}}},
      {"gamma", {{"p", gamma.p}, {"min_gamma", gamma.min_gamma}, {"max_gamma", gamma.max_gamma}}},
      {"mirror", {{"p", mirror.p}}},
  };
}

void AugmentConfig::validate() const {
  check_p(rotation.p, "rotation");
  check_p(scaling.p, "scaling");
  check_p(noise.p, "noise");
  check_p(blur.p, "blur");
  check_p(brightness.p, "brightness");
  check_p(contrast.p, "contrast");
  check_p(low_resolution.p, "low_resolution");
  check_p(gamma.p, "gamma");
  for (double p : mirror.p) check_p(p, "mirror");
  if (!(rotation.max_degrees >= 0.0 && rotation.max_degrees <= 180.0)) {
    fail(ErrorCode::Config, "rotation max_degrees must be in [0, 180], got {}", rotation.max_degrees);
  }
  check_range(scaling.min_zoom, scaling.max_zoom, "scaling zoom", true);
  check_range(0.0, noise.max_variance, "noise variance", false);
  check_range(blur.min_sigma, blur.max_sigma, "blur sigma", true);
  check_range(brightness.min_factor, brightness.max_factor, "brightness factor", true);
  check_range(contrast.min_factor, contrast.max_factor, "contrast factor", true);
  check_range(low_resolution.min_zoom, low_resolution.max_zoom, "low-resolution zoom", true);
  if (low_resolution.max_zoom > 1.0) {
    fail(ErrorCode::Config, "low-resolution zoom must not exceed 1, got {}", low_resolution.max_zoom);
  }
  check_range(gamma.min_gamma, gamma.max_gamma, "gamma", true);
}

Sample mirror(const Sample& sample, int axis) {
  if (axis < 0 || axis > 2) fail(ErrorCode::InvalidArgument, "mirror axis {} out of range", axis);
  const Dims& d = sample.image.dims();
  auto flip = [&](std::span<const float> in, std::size_t planes) {
    std::vector<float> out(in.size());
    const std::size_t n = d.voxels();
    for (std::size_t c = 0; c < planes; ++c) {
      std::size_t i = 0;
      for (std::size_t z = 0; z < d.nz; ++z) {
        for (std::size_t y = 0; y < d.ny; ++y) {
          for (std::size_t x = 0; x < d.nx; ++x, ++i) {
            const std::size_t sx = axis == 0 ? d.nx - 1 - x : x;
            const std::size_t sy = axis == 1 ? d.ny - 1 - y : y;
            const std::size_t sz = axis == 2 ? d.nz - 1 - z : z;
            out[c * n + i] = in[c * n + (sz * d.ny + sy) * d.nx + sx];
          }
        }
      }
    }
    return out;
  };
  return {sample.image.with_data(flip(sample.image.data(), sample.image.channels())),
          ProbMask(sample.mask.grid(), sample.mask.num_classes(),
                   flip(sample.mask.probs(), sample.mask.num_classes()))};
}

Sample base_augment(const Sample& sample, const AugmentConfig& config, RngStream rng) {
  config.validate();
  if (!(sample.mask.grid() == sample.image.grid())) {
    fail(ErrorCode::GridMismatch, "mask grid does not match its image");
  }
  Volume image = sample.image;
  ProbMask mask = sample.mask;
  const Grid& grid = image.grid();

  // Spatial: rotation and zoom share one resampling.
  RngStream spatial = rng.derive("spatial");
  const bool rotate = spatial.bernoulli(config.rotation.p);
  const double degrees =
      rotate ? spatial.uniform(-config.rotation.max_degrees, config.rotation.max_degrees) : 0.0;
  const bool zoom = spatial.bernoulli(config.scaling.p);
  const double factor = zoom ? spatial.uniform(config.scaling.min_zoom, config.scaling.max_zoom) : 1.0;
  if (rotate || zoom) {
    const corrupt::Warp warp =
        compose(corrupt::zoom_warp(grid, factor), corrupt::rotation_warp(grid, degrees));
    image = corrupt::warp_volume(image, warp, corrupt::FillMode::ChannelMinimum);
    mask = corrupt::warp_probs(mask, warp, corrupt::FillMode::ChannelMinimum);
  }

  RngStream noise = rng.derive("noise");
  if (noise.bernoulli(config.noise.p)) {
    const double variance = noise.uniform(0.0, config.noise.max_variance);
    image = map_channels(image, [&](std::span<const float> in, std::span<float> out, std::size_t c) {
      const double sd = std::sqrt(variance) * mean_std(in).std;
      RngStream r = noise.derive(static_cast<std::uint64_t>(c));
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<float>(in[i] + sd * r.normal());
    });
  }

  RngStream blur = rng.derive("blur");
  if (blur.bernoulli(config.blur.p)) {
    const double sigma = blur.uniform(config.blur.min_sigma, config.blur.max_sigma);
    image = corrupt::gaussian_smooth(image, sigma * grid.spacing[0]);
  }

  RngStream brightness = rng.derive("brightness");
  if (brightness.bernoulli(config.brightness.p)) {
    const double f = brightness.uniform(config.brightness.min_factor, config.brightness.max_factor);
    image = map_channels(image, [&](std::span<const float> in, std::span<float> out, std::size_t) {
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<float>(in[i] * f);
    });
  }

  RngStream contrast = rng.derive("contrast");
  if (contrast.bernoulli(config.contrast.p)) {
    const double f = contrast.uniform(config.contrast.min_factor, config.contrast.max_factor);
    image = map_channels(image, [&](std::span<const float> in, std::span<float> out, std::size_t) {
      const double mean = mean_std(in).mean;
      const auto [lo, hi] = std::minmax_element(in.begin(), in.end());
      for (std::size_t i = 0; i < in.size(); ++i) {
        const double v = (in[i] - mean) * f + mean;
        out[i] = static_cast<float>(std::clamp(v, static_cast<double>(*lo), static_cast<double>(*hi)));
      }
    });
  }

  RngStream lowres = rng.derive("low_resolution");
  if (lowres.bernoulli(config.low_resolution.p)) {
    const double z = lowres.uniform(config.low_resolution.min_zoom, config.low_resolution.max_zoom);
    image = corrupt::downsample_restore(image, {1.0 / z, 1.0 / z, 1.0});
  }

  RngStream gamma = rng.derive("gamma");
  if (gamma.bernoulli(config.gamma.p)) {
    const double g = gamma.uniform(config.gamma.min_gamma, config.gamma.max_gamma);
    image = map_channels(image, [&](std::span<const float> in, std::span<float> out, std::size_t) {
      const auto [lo_it, hi_it] = std::minmax_element(in.begin(), in.end());
      const double lo = *lo_it;
      const double width = static_cast<double>(*hi_it) - lo;
      for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = width > 0.0 ? static_cast<float>(lo + width * std::pow((in[i] - lo) / width, g)) : in[i];
      }
    });
  }

  RngStream flips = rng.derive("mirror");
  Sample out{std::move(image), std::move(mask)};
  for (int axis = 0; axis < 3; ++axis) {
    if (flips.bernoulli(config.mirror.p[static_cast<std::size_t>(axis)]) &&
        out.image.dims()[static_cast<std::size_t>(axis)] > 1) {
      out = mirror(out, axis);
    }
  }
  return out;
}

}  // namespace mrk::augment
