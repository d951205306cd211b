#include <algorithm>
#include <cmath>

#include "mrk/augment/augment.hpp"
#include "mrk/core/error.hpp"
#include "mrk/core/stats.hpp"
#include "mrk/spectral/slices.hpp"

namespace mrk::augment {

using spectral::cplx;

namespace {

void check_inplane(const Volume& volume) {
  const Dims& d = volume.dims();
  if (d.nx < 2 || d.ny < 2) {
    fail(ErrorCode::InvalidArgument, "AFA needs in-plane size >= 2, got {}x{}", d.nx, d.ny);
  }
}

void add_pair(std::span<cplx> spec, const Dims& d, std::size_t ix, std::size_t iy, double value) {
  const std::size_t mx = spectral::mirror_index(ix, d.nx);
  const std::size_t my = spectral::mirror_index(iy, d.ny);
  spec[iy * d.nx + ix] += value;
  if (mx != ix || my != iy) spec[my * d.nx + mx] += value;
}

double channel_scale(std::span<const float> plane) {
  const IntensityRange r = robust_range(plane);
  if (r.width() > 0.0) return r.width();
  const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
  return static_cast<double>(*hi) - static_cast<double>(*lo);
}

}  // namespace

Volume afa_augment_at(const Volume& volume, corrupt::FrequencyCoordinate k, double alpha) {
  check_inplane(volume);
  if (!std::isfinite(alpha)) fail(ErrorCode::InvalidArgument, "AFA amplitude must be finite");
  const Dims& d = volume.dims();
  const std::size_t ix = spectral::frequency_index(k.kx, d.nx);
  const std::size_t iy = spectral::frequency_index(k.ky, d.ny);
  const double n = static_cast<double>(d.nx * d.ny);
  return spectral::map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t, std::size_t) {
    add_pair(spec, d, ix, iy, alpha * n);
  });
}

Volume afa_augment(const Volume& volume, const AfaParams& params, RngStream rng) {
  check_inplane(volume);
  if (!(params.mu >= 0.0) || !std::isfinite(params.mu)) {
    fail(ErrorCode::InvalidArgument, "AFA mu must be finite and >= 0, got {}", params.mu);
  }
  if (params.coords_per_sample < 1) {
    fail(ErrorCode::InvalidArgument, "coords_per_sample must be >= 1, got {}",
         params.coords_per_sample);
  }
  const Dims& d = volume.dims();
  const double n = static_cast<double>(d.nx * d.ny);
  std::vector<double> scale(volume.channels(), 1.0);
  if (params.relative_to_range) {
    for (std::size_t c = 0; c < volume.channels(); ++c) scale[c] = channel_scale(volume.channel(c));
  }
  const auto hx = static_cast<long>(d.nx / 2);
  const auto hy = static_cast<long>(d.ny / 2);
  return spectral::map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t c, std::size_t z) {
    RngStream r = rng.derive(static_cast<std::uint64_t>(c)).derive(static_cast<std::uint64_t>(z));
    for (int i = 0; i < params.coords_per_sample; ++i) {
      long kx = 0;
      long ky = 0;
      while (kx == 0 && ky == 0) {
        kx = static_cast<long>(r.below(d.nx)) - hx;
        ky = static_cast<long>(r.below(d.ny)) - hy;
      }
      double alpha = params.mu > 0.0 ? r.exponential(params.mu) : 0.0;
      if (params.sign_symmetric && r.bernoulli(0.5)) alpha = -alpha;
      add_pair(spec, d, spectral::frequency_index(kx, d.nx), spectral::frequency_index(ky, d.ny),
               alpha * scale[c] * n);
    }
  });
}

AugmentedPair make_afa_pair(const Sample& sample, const AfaParams& params, RngStream rng) {
  return {sample, {afa_augment(sample.image, params, rng), sample.mask}};
}

}  // namespace mrk::augment
