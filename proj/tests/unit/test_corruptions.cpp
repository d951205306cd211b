#include <doctest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "mrk/core/error.hpp"
#include "mrk/core/stats.hpp"
#include "mrk/corruptions/corrupt.hpp"
#include "mrk/corruptions/operations.hpp"
#include "mrk/corruptions/severity_config.hpp"
#include "mrk/corruptions/warp.hpp"
#include "support/oracles.hpp"
#include "support/phantom.hpp"
#include "support/zero_params.hpp"

using namespace mrk;
using namespace mrk::corrupt;

namespace {

Volume impulse(std::size_t nx, std::size_t ny, std::size_t x0, std::size_t y0) {
  const Grid g = Grid::with_spacing({nx, ny, 1}, {1, 1, 1});
  std::vector<float> data(nx * ny, 0.0f);
  data[y0 * nx + x0] = 1.0f;
  return Volume(g, 1, std::move(data));
}

}  // namespace

TEST_SUITE("corruptions") {

TEST_CASE("transform names round trip") {
  std::set<std::string_view> names;
  for (auto k : kAllTransforms) {
    names.insert(name(k));
    CHECK(parse_transform_kind(name(k)) == k);
    CHECK(parse_transform_kind(key(k)) == k);
  }
  CHECK(names.size() == 14);
  CHECK_FALSE(parse_transform_kind("Blur").has_value());
  CHECK(moves_anatomy(TransformKind::Rotation));
  CHECK(moves_anatomy(TransformKind::ElasticDeformation));
  CHECK_FALSE(moves_anatomy(TransformKind::IsoDownsample));
}

TEST_CASE("severity config defaults, json round trip and validation") {
  const auto cfg = SeverityConfig::defaults();
  for (auto k : kAllTransforms) {
    CHECK(cfg.contains(k));
    CHECK_NOTHROW(cfg.params(k, 1));
    CHECK_THROWS_AS(cfg.params(k, 0), Error);
    CHECK_THROWS_AS(cfg.params(k, 6), Error);
  }
  const auto back = SeverityConfig::from_json(cfg.to_json());
  CHECK(back.hash() == cfg.hash());
  CHECK(back.to_json() == cfg.to_json());

  const auto& ghost = std::get<GhostingParams>(cfg.params(TransformKind::Ghosting, 3));
  CHECK(ghost.num_ghosts == 4);
  CHECK(ghost.intensity == 0.5);

  auto doc = cfg.to_json();
  doc["RicianNoise"][2]["sigma_fraction"] = 0.01;  // below severity 2
  CHECK_THROWS_AS(SeverityConfig::from_json(doc), Error);
  doc = cfg.to_json();
  doc["version"] = 99;
  CHECK_THROWS_AS(SeverityConfig::from_json(doc), Error);
  doc = cfg.to_json();
  doc["Ghosting"][0]["intensity"] = 1.5;
  CHECK_THROWS_AS(SeverityConfig::from_json(doc), Error);

  auto changed = cfg.to_json();
  changed["Smoothing"][4]["sigma_mm"] = 3.5;
  CHECK(SeverityConfig::from_json(changed).hash() != cfg.hash());
}

TEST_CASE("ghosting impulse matches the comb-filter closed form") {
  const std::size_t n = 16;
  const Volume out = ghosting(impulse(8, n, 0, 0), 2, 1.0);
  // Lines at even nonzero frequency removed: 1/n from DC, +-1/2 at 0 and n/2.
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      double expected = 0.0;
      if (x == 0) {
        expected = 1.0 / 16.0;
        if (y == 0) expected += 0.5;
        if (y == n / 2) expected -= 0.5;
      }
      CAPTURE(x);
      CAPTURE(y);
      CHECK(out.at(0, x, y, 0) == doctest::Approx(expected).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("ghosting scales the selected lines against a naive DFT") {
  const auto ph = test::cardiac_phantom(12, 10, 1);
  const Volume out = ghosting(ph.image, 3, 0.4);
  std::vector<test::cd> plane(120);
  for (std::size_t i = 0; i < 120; ++i) plane[i] = ph.image.data()[i];
  auto spec = test::naive_dft2(plane, 12, 10);
  for (std::size_t y = 0; y < 10; ++y) {
    const long k = y < 5 ? static_cast<long>(y) : static_cast<long>(y) - 10;
    if (k != 0 && k % 3 == 0) {
      for (std::size_t x = 0; x < 12; ++x) spec[y * 12 + x] *= 0.6;
    }
  }
  const auto ref = test::naive_dft2(spec, 12, 10, true);
  for (std::size_t i = 0; i < 120; ++i) CHECK(out.data()[i] == doctest::Approx(ref[i].real()).epsilon(1e-5).scale(1.0));
  CHECK_THROWS_AS(ghosting(ph.image, 11, 0.5), Error);
  CHECK_THROWS_AS(ghosting(ph.image, 2, 1.5), Error);
}

TEST_CASE("spike adds a planar wave") {
  const auto ph = test::cardiac_phantom(16, 12, 1);
  const double value = 30.0;
  const Volume out = add_kspace_spike(ph.image, {3, -2}, value);
  for (std::size_t y = 0; y < 12; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      const double wave = 2.0 * value / 192.0 *
                          std::cos(2.0 * M_PI * (3.0 * static_cast<double>(x) / 16.0 -
                                                 2.0 * static_cast<double>(y) / 12.0));
      CHECK(out.at(0, x, y, 0) - ph.image.at(0, x, y, 0) == doctest::Approx(wave).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("spike noise stays in band and is reproducible") {
  const auto ph = test::cardiac_phantom(32, 32, 2);
  const RngStream rng = RngStream(5).derive("spike");
  CHECK(spike_noise(ph.image, 1, 0.3, rng) == spike_noise(ph.image, 1, 0.3, rng));
  CHECK(spike_noise(ph.image, 2, 0.0, rng) == ph.image);
  CHECK_THROWS_AS(spike_noise(ph.image, 0, 0.3, rng), Error);
}

TEST_CASE("k-space subsampling keeps the centred window") {
  const auto ph = test::cardiac_phantom(12, 10, 1);
  const Volume out = kspace_subsample(ph.image, 0.5);
  std::vector<test::cd> plane(120);
  for (std::size_t i = 0; i < 120; ++i) plane[i] = ph.image.data()[i];
  auto spec = test::naive_dft2(plane, 12, 10);
  // kept = 5 lines: centred indices 3..7, signed frequencies -2..2.
  for (std::size_t y = 0; y < 10; ++y) {
    const long k = y < 5 ? static_cast<long>(y) : static_cast<long>(y) - 10;
    if (k < -2 || k > 2) {
      for (std::size_t x = 0; x < 12; ++x) spec[y * 12 + x] = 0.0;
    }
  }
  const auto ref = test::naive_dft2(spec, 12, 10, true);
  for (std::size_t i = 0; i < 120; ++i) CHECK(out.data()[i] == doctest::Approx(ref[i].real()).epsilon(1e-5).scale(1.0));
  CHECK(test::max_abs_diff(kspace_subsample(ph.image, 1.0).data(), ph.image.data()) < 1e-5);
}

TEST_CASE("rician noise on a zero image has the Rayleigh mean") {
  const Grid g = Grid::with_spacing({100, 100, 10}, {1, 1, 1});
  const Volume zero = Volume::filled(g, 1, 0.0f);
  const Volume out = rician_noise(zero, 1.0, RngStream(3), NoiseScale::Absolute);
  CHECK(mean_std(out.data()).mean == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(0.02));
  const auto ph = test::cardiac_phantom(16, 16, 2);
  CHECK(rician_noise(ph.image, 0.0, RngStream(3)) == ph.image);
  const Volume noisy = rician_noise(ph.image, 0.1, RngStream(3));
  for (float v : noisy.data()) CHECK(v >= 0.0f);
}

TEST_CASE("bias field equals the directly evaluated polynomial") {
  const auto ph = test::cardiac_phantom(14, 12, 3);
  const auto poly = draw_bias_polynomial(3, 0.4, RngStream(11));
  CHECK(poly.terms.size() == 20);  // monomials of total degree <= 3 in 3 variables
  const Volume out = apply_bias_field(ph.image, poly);
  const Dims d = ph.image.dims();
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const double u = 2.0 * static_cast<double>(x) / 13.0 - 1.0;
        const double v = 2.0 * static_cast<double>(y) / 11.0 - 1.0;
        const double w = 2.0 * static_cast<double>(z) / 2.0 - 1.0;
        double p = 0.0;
        for (const auto& t : poly.terms) {
          p += t.coefficient * std::pow(u, t.px) * std::pow(v, t.py) * std::pow(w, t.pz);
        }
        const double expected = ph.image.at(0, x, y, z) * std::exp(p);
        CHECK(out.at(0, x, y, z) == doctest::Approx(expected).epsilon(1e-6));
      }
    }
  }
  CHECK(bias_field(ph.image, 0.0, 3, RngStream(11)) == ph.image);
  CHECK(normalized_coordinate(0, 1) == 0.0);
}

TEST_CASE("gamma maps the robust window") {
  const auto ph = test::cardiac_phantom(20, 20, 2);
  const Volume out = gamma_map(ph.image, 0.5);
  const IntensityRange r = robust_range(ph.image.data());
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    const double x = ph.image.data()[i];
    const double expected =
        (x < r.low || x > r.high) ? x : r.low + r.width() * std::sqrt((x - r.low) / r.width());
    CHECK(out.data()[i] == doctest::Approx(expected).epsilon(1e-6));
  }
  CHECK(gamma_map(ph.image, 1.0) == ph.image);
  CHECK_THROWS_AS(gamma_map(Volume::filled(ph.image.grid(), 1, 2.0f), 0.5), Error);
  CHECK_THROWS_AS(gamma_map(ph.image, 0.0), Error);
}

TEST_CASE("smoothing an impulse gives the sampled Gaussian") {
  const Grid g = Grid::with_spacing({41, 41, 1}, {0.5, 1.0, 3.0});
  std::vector<float> data(41 * 41, 0.0f);
  data[20 * 41 + 20] = 1.0f;
  const Volume out = gaussian_smooth(Volume(g, 1, data), 1.5);
  auto kernel = [](double sigma_vox, long offset) {
    const long radius = static_cast<long>(std::ceil(4.0 * sigma_vox));
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) sum += std::exp(-0.5 * i * i / (sigma_vox * sigma_vox));
    return std::abs(offset) > radius ? 0.0
                                     : std::exp(-0.5 * offset * offset / (sigma_vox * sigma_vox)) / sum;
  };
  for (long y = 0; y < 41; ++y) {
    for (long x = 0; x < 41; ++x) {
      const double expected = kernel(3.0, x - 20) * kernel(1.5, y - 20);
      CHECK(out.at(0, static_cast<std::size_t>(x), static_cast<std::size_t>(y), 0) ==
            doctest::Approx(expected).epsilon(1e-4).scale(1e-4));
    }
  }
}

TEST_CASE("warps: identity, flips and label nearest neighbour") {
  const auto ph = test::cardiac_phantom(24, 20, 3);
  CHECK(test::max_abs_diff(warp_volume(ph.image, rotation_warp(ph.image.grid(), 0.0), FillMode::Clamp).data(),
                           ph.image.data()) < 1e-6);
  CHECK(warp_labels(ph.labels, zoom_warp(ph.labels.grid(), 1.0), FillMode::ChannelMinimum) == ph.labels);
  const Volume flipped = warp_volume(ph.image, flip_warp(ph.image.grid(), 0), FillMode::Clamp);
  CHECK(flipped.at(0, 0, 5, 1) == ph.image.at(0, 23, 5, 1));
  // Four quarter turns of a square grid come back exactly.
  const auto sq = test::cardiac_phantom(16, 16, 1, 7, {1, 1, 1});
  LabelMask m = sq.labels;
  for (int i = 0; i < 4; ++i) m = warp_labels(m, rotation_warp(m.grid(), 90.0), FillMode::ChannelMinimum);
  CHECK(m == sq.labels);
  const auto probs = warp_probs(one_hot(sq.labels), rotation_warp(sq.labels.grid(), 17.0), FillMode::ChannelMinimum);
  for (std::size_t i = 0; i < sq.labels.grid().voxels(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < probs.num_classes(); ++c) s += probs.plane(c)[i];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("geometric transforms carry labels only when anatomy moves") {
  const auto ph = test::cardiac_phantom(32, 32, 2);
  const RngStream rng(1);
  const auto rot = resample_geometric(ph.image, GeometricMode::Rotate, 20.0, rng, &ph.labels);
  REQUIRE(rot.labels.has_value());
  CHECK(rot.labels->grid() == ph.labels.grid());
  const auto down = resample_geometric(ph.image, GeometricMode::IsoDownsample, 2.0, rng, &ph.labels);
  CHECK_FALSE(down.labels.has_value());
  const auto el = elastic_deform(ph.image, 6.0, 7, rng, &ph.labels);
  REQUIRE(el.labels.has_value());
  std::set<std::uint32_t> seen(el.labels->labels().begin(), el.labels->labels().end());
  CHECK(seen == std::set<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("downsample restore by one is the identity") {
  const auto ph = test::cardiac_phantom(20, 18, 2);
  CHECK(downsample_restore(ph.image, {1.0, 1.0, 1.0}) == ph.image);
  const Volume half = downsample_restore(ph.image, {2.0, 2.0, 1.0});
  CHECK(half.grid() == ph.image.grid());
  CHECK(nrmse(half, ph.image) > 0.0);
}

TEST_CASE("motion from one segment equals the moved copy") {
  const auto ph = test::cardiac_phantom(24, 24, 2);
  MotionPlan plan;
  plan.moves = {{5.0, 2.0, -1.5}};
  plan.breakpoints = {0};
  const Volume moved = apply_motion(ph.image, plan);
  const Volume copy =
      warp_volume(ph.image, rigid_warp(ph.image.grid(), 5.0, 2.0, -1.5), FillMode::ChannelMinimum);
  CHECK(test::max_abs_diff(moved.data(), copy.data()) < 1e-5);

  plan.breakpoints = {24};
  CHECK(test::max_abs_diff(apply_motion(ph.image, plan).data(), ph.image.data()) < 1e-5);

  const auto drawn = draw_motion_plan(24, 3, 10.0, 5.0, RngStream(2));
  CHECK(drawn.moves.size() == 3);
  CHECK(std::is_sorted(drawn.breakpoints.begin(), drawn.breakpoints.end()));
  for (const auto& m : drawn.moves) {
    CHECK(std::abs(m.degrees) <= 10.0);
    CHECK(std::abs(m.tx_mm) <= 5.0);
  }
}

TEST_CASE("every transform: grid preserved, finite, deterministic, zero strength is identity") {
  const auto ph = test::cardiac_phantom(32, 28, 3);
  const auto cfg = SeverityConfig::defaults();
  const double range = test::max_abs(ph.image.data());
  for (auto kind : kAllTransforms) {
    CAPTURE(name(kind));
    const RngStream rng = corruption_stream(9, "case", kind, 3);
    const auto a = apply_corruption(ph.image, &ph.labels, kind, 3, cfg, rng);
    const auto b = apply_corruption(ph.image, &ph.labels, kind, 3, cfg, rng);
    CHECK(a.volume == b.volume);
    CHECK(a.volume.grid() == ph.image.grid());
    CHECK(a.labels.has_value() == moves_anatomy(kind));
    for (float v : a.volume.data()) REQUIRE(std::isfinite(v));
    const auto z = apply_params(ph.image, nullptr, kind, test::zero_strength(kind), rng);
    CHECK(test::max_abs_diff(z.volume.data(), ph.image.data()) <= 1e-4 * range);
  }
  CHECK(corruption_stream(1, "a", TransformKind::Rotation, 1).key() !=
        corruption_stream(1, "a", TransformKind::Rotation, 2).key());
  CHECK_THROWS_AS(apply_params(ph.image, nullptr, TransformKind::Rotation, GammaParams{0.5}, RngStream(1)),
                  Error);
}

TEST_CASE("multi-channel volumes share geometry across channels") {
  const auto ph = test::cardiac_phantom(24, 24, 2);
  std::vector<float> two(ph.image.data().begin(), ph.image.data().end());
  two.insert(two.end(), ph.image.data().begin(), ph.image.data().end());
  const Volume v(ph.image.grid(), 2, two);
  const auto cfg = SeverityConfig::defaults();
  const auto rot = apply_corruption(v, TransformKind::Rotation, 4, cfg, RngStream(4));
  CHECK(test::max_abs_diff(rot.channel(0), rot.channel(1)) == 0.0);
  const auto noisy = apply_corruption(v, TransformKind::RicianNoise, 4, cfg, RngStream(4));
  CHECK(test::max_abs_diff(noisy.channel(0), noisy.channel(1)) > 0.0);
}

}
