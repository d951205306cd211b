#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "mrk/augment/augment.hpp"
#include "mrk/core/error.hpp"
#include "mrk/spectral/fft.hpp"
#include "support/oracles.hpp"
#include "support/phantom.hpp"

using namespace mrk;
using namespace mrk::augment;

namespace {

Sample phantom_sample(std::size_t n, std::uint32_t seed) {
  auto ph = test::cardiac_phantom(n, n, 2, seed);
  return {ph.image, one_hot(ph.labels)};
}

Sample random_one_hot_sample(const Grid& g, std::size_t classes, RngStream& rng) {
  std::vector<std::uint32_t> labels(g.voxels());
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng.below(classes));
  std::vector<float> image(g.voxels());
  for (auto& v : image) v = static_cast<float>(rng.uniform(-1.0, 3.0));
  return {Volume(g, 1, image), one_hot(LabelMask(g, labels, static_cast<std::uint32_t>(classes)))};
}

void check_sums_to_one(const ProbMask& p, double tol) {
  const std::size_t n = p.grid().voxels();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.num_classes(); ++c) s += p.plane(c)[i];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst <= tol);
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("mixup endpoints, midpoint and convexity") {
  const Sample a = phantom_sample(16, 1);
  const Sample b = phantom_sample(16, 2);
  const Sample one = mixup_with_lambda(a, b, 1.0);
  CHECK(one.image == a.image);
  CHECK(one.mask == a.mask);
  const Sample zero = mixup_with_lambda(a, b, 0.0);
  CHECK(zero.image == b.image);
  CHECK(zero.mask == b.mask);

  const Grid g = a.image.grid();
  const Sample z{Volume::filled(g, 1, 0.0f), a.mask};
  const Sample t{Volume::filled(g, 1, 2.0f), b.mask};
  const Sample mid = mixup_with_lambda(z, t, 0.5);
  for (float v : mid.image.data()) CHECK(v == 1.0f);
  for (std::size_t i = 0; i < mid.mask.probs().size(); ++i) {
    CHECK(mid.mask.probs()[i] == doctest::Approx(0.5 * (a.mask.probs()[i] + b.mask.probs()[i])));
  }

  const auto r = mixup(a, b, {}, RngStream(3));
  CHECK((r.lambda >= 0.0 && r.lambda <= 1.0));
  for (std::size_t i = 0; i < r.sample.image.data().size(); ++i) {
    const float lo = std::min(a.image.data()[i], b.image.data()[i]);
    const float hi = std::max(a.image.data()[i], b.image.data()[i]);
    CHECK(r.sample.image.data()[i] >= lo);
    CHECK(r.sample.image.data()[i] <= hi);
  }
  check_sums_to_one(r.sample.mask, 1e-6);
  CHECK(mixup(a, b, {}, RngStream(3)).sample == r.sample);

  const Sample other = phantom_sample(12, 1);
  CHECK_THROWS_AS(mixup(a, other, {}, RngStream(1)), Error);
  CHECK_THROWS_AS(mixup(a, b, {0.0}, RngStream(1)), Error);
}

TEST_CASE("cutmix boxes and voxel provenance") {
  const Sample a = phantom_sample(20, 1);
  const Sample b = phantom_sample(20, 2);
  const Dims d = a.image.dims();
  CHECK(cutmix_with_box(a, b, Box{}) == a);
  const Box all{{0, 0, 0}, {d.nx, d.ny, d.nz}};
  CHECK(cutmix_with_box(a, b, all) == b);

  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto r = cutmix(a, b, {}, RngStream(s));
    const double fraction = static_cast<double>(r.box.voxels()) / static_cast<double>(d.voxels());
    // Each side within one voxel layer of its ideal length.
    double lo = 1.0, hi = 1.0;
    for (std::size_t ax = 0; ax < 3; ++ax) {
      const double n = static_cast<double>(d[ax]);
      const double ideal = n * std::cbrt(1.0 - r.lambda);
      lo *= std::max(ideal - 1.0, 0.0) / n;
      hi *= std::min(ideal + 1.0, n) / n;
    }
    CHECK(fraction >= lo - 1e-12);
    CHECK(fraction <= hi + 1e-12);
    for (std::size_t z = 0; z < d.nz; ++z) {
      for (std::size_t y = 0; y < d.ny; ++y) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          const auto& src = r.box.contains(x, y, z) ? b : a;
          REQUIRE(r.sample.image.at(0, x, y, z) == src.image.at(0, x, y, z));
        }
      }
    }
    check_sums_to_one(r.sample.mask, 1e-6);
  }
}

TEST_CASE("cutmix box fraction on a 3-D grid") {
  RngStream rng(8);
  const Dims d{32, 32, 32};
  for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const Box box = draw_cutmix_box(d, lambda, rng);
    const double side = std::round(32.0 * std::cbrt(1.0 - lambda));
    CHECK(box.voxels() == static_cast<std::size_t>(side * side * side));
  }
}

TEST_CASE("batch pairing reverses the batch") {
  RngStream rng(4);
  std::vector<Sample> batch;
  const Grid g = Grid::with_spacing({6, 6, 1}, {1, 1, 1});
  for (int i = 0; i < 4; ++i) batch.push_back(random_one_hot_sample(g, 3, rng));
  const auto mixed = mixup_batch(batch, {}, RngStream(5));
  REQUIRE(mixed.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const Sample expect = mixup_with_lambda(batch[i], batch[3 - i], mixed[i].lambda);
    CHECK(mixed[i].sample == expect);
  }
  const auto cut = cutmix_batch(batch, {}, RngStream(5));
  CHECK(cut.size() == 4);
}

TEST_CASE("afa single coefficient is a planar cosine") {
  const Grid g = Grid::with_spacing({16, 12, 1}, {1, 1, 1});
  const Volume zero = Volume::filled(g, 1, 0.0f);
  const double alpha = 0.3;
  const Volume out = afa_augment_at(zero, {2, 5}, alpha);
  std::vector<test::cd> spec(192, 0.0);
  spec[5 * 16 + 2] += alpha * 192.0;
  spec[7 * 16 + 14] += alpha * 192.0;
  const auto ref = test::naive_dft2(spec, 16, 12, true);
  for (std::size_t i = 0; i < 192; ++i) {
    CHECK(out.data()[i] == doctest::Approx(ref[i].real()).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("afa leaves DC and other bins alone") {
  const Sample s = phantom_sample(24, 3);
  const Volume out = afa_augment(s.image, {}, RngStream(6));
  const auto before = spectral::fft_forward(s.image);
  const auto after = spectral::fft_forward(out);
  const std::size_t plane = 24 * 24;
  for (std::size_t z = 0; z < 2; ++z) {
    std::size_t changed = 0;
    double peak = 0.0;
    for (std::size_t i = 0; i < plane; ++i) peak = std::max(peak, std::abs(test::cd(before.data()[z * plane + i])));
    for (std::size_t i = 0; i < plane; ++i) {
      if (std::abs(test::cd(after.data()[z * plane + i]) - test::cd(before.data()[z * plane + i])) > 1e-4 * peak) {
        ++changed;
      }
    }
    CHECK(changed >= 1);
    CHECK(changed <= 2);
    CHECK(std::abs(test::cd(after.data()[z * plane]) - test::cd(before.data()[z * plane])) < 1e-4 * peak);
  }
  AfaParams off;
  off.mu = 0.0;
  CHECK(test::max_abs_diff(afa_augment(s.image, off, RngStream(6)).data(), s.image.data()) < 1e-5);
  CHECK(afa_augment(s.image, {}, RngStream(6)) == out);
}

TEST_CASE("afa pair shares the mask and keeps the clean image") {
  const Sample s = phantom_sample(16, 4);
  int differ = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto pair = make_afa_pair(s, {}, RngStream(i));
    REQUIRE(pair.clean == s);
    REQUIRE(pair.afa.mask == s.mask);
    differ += pair.afa.image == s.image ? 0 : 1;
  }
  CHECK(differ == 100);
}

TEST_CASE("base augmentation") {
  const Sample s = phantom_sample(24, 5);
  CHECK(base_augment(s, AugmentConfig::disabled(), RngStream(1)) == s);

  const Sample m = mirror(s, 0);
  CHECK(m.image.at(0, 0, 3, 1) == s.image.at(0, 23, 3, 1));
  CHECK(m.mask.plane(2)[3 * 24] == s.mask.plane(2)[3 * 24 + 23]);
  CHECK(mirror(m, 0) == s);

  AugmentConfig everything;
  everything.rotation.p = everything.scaling.p = everything.noise.p = everything.blur.p = 1.0;
  everything.brightness.p = everything.contrast.p = everything.low_resolution.p = everything.gamma.p = 1.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Sample out = base_augment(s, i % 2 ? everything : AugmentConfig{}, RngStream(i));
    REQUIRE(out.image.grid() == s.image.grid());
    check_sums_to_one(out.mask, 1e-5);
  }
  CHECK(base_augment(s, everything, RngStream(9)) == base_augment(s, everything, RngStream(9)));

  const auto cfg = AugmentConfig::from_json(everything.to_json());
  CHECK(cfg.to_json() == everything.to_json());
  auto bad = everything.to_json();
  bad["rotation"]["p"] = 1.5;
  CHECK_THROWS_AS(AugmentConfig::from_json(bad), Error);
  CHECK(augment_stream(1, "s", "mixup").key() == augment_stream(1, "s", "mixup").key());
}

}
