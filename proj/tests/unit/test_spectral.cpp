#include <doctest.h>

#include <random>

#include "mrk/core/error.hpp"
#include "mrk/spectral/fft.hpp"
#include "mrk/spectral/slices.hpp"
#include "support/oracles.hpp"

using namespace mrk;
using namespace mrk::spectral;

namespace {

Volume random_volume(std::size_t nx, std::size_t ny, std::size_t nz, std::size_t channels,
                     unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> data(nx * ny * nz * channels);
  for (auto& v : data) v = u(gen);
  return Volume(Grid::with_spacing({nx, ny, nz}, {1, 1, 2}), channels, std::move(data));
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("forward transform matches the naive DFT") {
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{8, 8}, {9, 6}, {16, 12}, {5, 7}}) {
    const Volume v = random_volume(nx, ny, 2, 1, static_cast<unsigned>(nx * 31 + ny));
    const KSpace k = fft_forward(v);
    for (std::size_t z = 0; z < 2; ++z) {
      std::vector<test::cd> plane(nx * ny);
      for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = v.data()[z * nx * ny + i];
      const auto ref = test::naive_dft2(plane, nx, ny);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        err = std::max(err, std::abs(test::cd(k.data()[z * nx * ny + i]) - ref[i]));
        scale = std::max(scale, std::abs(ref[i]));
      }
      CHECK(err / scale < 1e-5);
    }
  }
}

TEST_CASE("round trip and Parseval") {
  const Volume v = random_volume(24, 20, 3, 2, 3);
  const KSpace k = fft_forward(v);
  const auto back = fft_inverse(k);
  CHECK(test::max_abs_diff(back.volume.data(), v.data()) < 1e-5);
  CHECK(back.imaginary_residue < 1e-5);
  double spatial = 0.0, spectral_energy = 0.0;
  for (float x : v.data()) spatial += static_cast<double>(x) * x;
  for (auto c : k.data()) spectral_energy += std::norm(test::cd(c));
  spectral_energy /= static_cast<double>(k.transform_size());
  CHECK(std::abs(spatial - spectral_energy) / spatial < 1e-4);

  const KSpace kv = fft_forward(v, Axes::Volume);
  CHECK(kv.transform_size() == 24u * 20u * 3u);
  CHECK(test::max_abs_diff(fft_inverse(kv).volume.data(), v.data()) < 1e-5);
}

TEST_CASE("centering puts DC at floor(n/2)") {
  const Grid g = Grid::with_spacing({5, 4, 1}, {1, 1, 1});
  const Volume ones = Volume::filled(g, 1, 1.0f);
  const KSpace c = shift_center(fft_forward(ones));
  CHECK(c.layout() == Layout::Centered);
  CHECK(std::abs(test::cd(c.data()[2 * 5 + 2]) - 20.0) < 1e-5);
  CHECK(unshift_center(c) == fft_forward(ones));
  CHECK(shift_center(c) == c);
}

TEST_CASE("frequency index helpers") {
  CHECK(signed_frequency(0, 8) == 0);
  CHECK(signed_frequency(3, 8) == 3);
  CHECK(signed_frequency(4, 8) == -4);
  CHECK(signed_frequency(7, 8) == -1);
  CHECK(signed_frequency(3, 7) == 3);
  CHECK(signed_frequency(4, 7) == -3);
  for (long k = -4; k < 4; ++k) CHECK(signed_frequency(frequency_index(k, 8), 8) == k);
  CHECK(mirror_index(0, 8) == 0);
  CHECK(mirror_index(3, 8) == 5);
}

TEST_CASE("slice spectra map preserves the volume under identity") {
  const Volume v = random_volume(12, 10, 3, 2, 9);
  std::size_t calls = 0;
  const Volume out = map_slice_spectra(v, [&](std::span<cplx>, std::size_t, std::size_t) { ++calls; });
  CHECK(calls == 6);
  CHECK(test::max_abs_diff(out.data(), v.data()) < 1e-5);
}

}
