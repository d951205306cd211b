#include <algorithm>
#include <cmath>

#include "mrk/core/error.hpp"
#include "mrk/corruptions/operations.hpp"
#include "mrk/spectral/fft.hpp"
#include "mrk/spectral/slices.hpp"

namespace mrk::corrupt {

using spectral::cplx;
using spectral::map_slice_spectra;

namespace {

void check_inplane(const Volume& volume, const char* what) {
  const Dims& d = volume.dims();
  if (d.nx < 2 || d.ny < 2) {
    fail(ErrorCode::InvalidArgument, "{} needs in-plane size >= 2, got {}x{}", what, d.nx, d.ny);
  }
}

void check_axis(int axis) {
  if (axis != 0 && axis != 1) {
    fail(ErrorCode::InvalidArgument, "phase axis must be 0 (x) or 1 (y), got {}", axis);
  }
}

std::size_t line_of(std::size_t x, std::size_t y, int axis) { return axis == 0 ? x : y; }

}  // namespace

Volume ghosting(const Volume& volume, int num_ghosts, double intensity, int axis) {
  check_inplane(volume, "ghosting");
  check_axis(axis);
  const Dims& d = volume.dims();
  const std::size_t n = d[static_cast<std::size_t>(axis)];
  if (num_ghosts < 1 || static_cast<std::size_t>(num_ghosts) > n) {
    fail(ErrorCode::InvalidArgument, "ghost count must be in [1, {}], got {}", n, num_ghosts);
  }
  if (!(intensity >= 0.0 && intensity <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "ghost intensity must be in [0, 1], got {}", intensity);
  }
  const double keep = 1.0 - intensity;
  std::vector<bool> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = spectral::signed_frequency(i, n);
    scaled[i] = k != 0 && k % num_ghosts == 0;
  }
  return map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t, std::size_t) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        if (scaled[line_of(x, y, axis)]) spec[y * d.nx + x] *= keep;
      }
    }
  });
}

Volume add_kspace_spike(const Volume& volume, FrequencyCoordinate k, double value) {
  check_inplane(volume, "spike noise");
  const Dims& d = volume.dims();
  const std::size_t ix = spectral::frequency_index(k.kx, d.nx);
  const std::size_t iy = spectral::frequency_index(k.ky, d.ny);
  const std::size_t mx = spectral::mirror_index(ix, d.nx);
  const std::size_t my = spectral::mirror_index(iy, d.ny);
  return map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t, std::size_t) {
    spec[iy * d.nx + ix] += value;
    if (mx != ix || my != iy) spec[my * d.nx + mx] += value;
  });
}

Volume spike_noise(const Volume& volume, int num_spikes, double amplitude, RngStream rng,
                   double band_low, double band_high) {
  check_inplane(volume, "spike noise");
  if (num_spikes < 1) fail(ErrorCode::InvalidArgument, "spike count must be >= 1, got {}", num_spikes);
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    fail(ErrorCode::InvalidArgument, "spike amplitude must be finite and >= 0, got {}", amplitude);
  }
  if (!(band_low >= 0.0 && band_low <= band_high && band_high <= std::sqrt(2.0))) {
    fail(ErrorCode::InvalidArgument, "invalid spike band [{}, {}]", band_low, band_high);
  }
  const Dims& d = volume.dims();
  const auto hx = static_cast<long>(d.nx / 2);
  const auto hy = static_cast<long>(d.ny / 2);

  // Coordinates are drawn once per volume so every slice shares the stripes.
  std::vector<std::pair<std::size_t, std::size_t>> bins;
  RngStream coords = rng.derive("coords");
  for (int s = 0; s < num_spikes; ++s) {
    bool found = false;
    for (int attempt = 0; attempt < 100000 && !found; ++attempt) {
      const long kx = static_cast<long>(coords.below(d.nx)) - hx;
      const long ky = static_cast<long>(coords.below(d.ny)) - hy;
      if (kx == 0 && ky == 0) continue;
      const double rx = static_cast<double>(kx) / static_cast<double>(hx);
      const double ry = static_cast<double>(ky) / static_cast<double>(hy);
      const double r = std::sqrt(rx * rx + ry * ry);
      if (r < band_low || r > band_high) continue;
      bins.emplace_back(spectral::frequency_index(kx, d.nx), spectral::frequency_index(ky, d.ny));
      found = true;
    }
    if (!found) {
      fail(ErrorCode::InvalidArgument, "no frequency in band [{}, {}] on a {}x{} grid", band_low,
           band_high, d.nx, d.ny);
    }
  }
  if (amplitude == 0.0) return volume;

  return map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t, std::size_t) {
    double peak = 0.0;
    for (const auto& v : spec) peak = std::max(peak, std::abs(v));
    const double value = amplitude * peak;
    for (const auto& [ix, iy] : bins) {
      const std::size_t mx = spectral::mirror_index(ix, d.nx);
      const std::size_t my = spectral::mirror_index(iy, d.ny);
      spec[iy * d.nx + ix] += value;
      if (mx != ix || my != iy) spec[my * d.nx + mx] += value;
    }
  });
}

Volume kspace_subsample(const Volume& volume, double keep_fraction, int axis) {
  check_inplane(volume, "k-space subsampling");
  check_axis(axis);
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "keep fraction must be in (0, 1], got {}", keep_fraction);
  }
  const Dims& d = volume.dims();
  const std::size_t n = d[static_cast<std::size_t>(axis)];
  const auto kept = static_cast<std::size_t>(
      std::clamp(std::ceil(keep_fraction * static_cast<double>(n) - 1e-9), 1.0, static_cast<double>(n)));
  // Contiguous window of centred line indices around DC at n / 2.
  const std::size_t first = n / 2 - kept / 2;
  std::vector<bool> keep(n, false);
  for (std::size_t j = first; j < first + kept; ++j) {
    const long k = static_cast<long>(j) - static_cast<long>(n / 2);
    keep[spectral::frequency_index(k, n)] = true;
  }
  return map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t, std::size_t) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        if (!keep[line_of(x, y, axis)]) spec[y * d.nx + x] = 0.0;
      }
    }
  });
}

MotionPlan draw_motion_plan(std::size_t phase_lines, int num_movements, double max_rotation_deg,
                            double max_translation_mm, RngStream rng) {
  if (num_movements < 1) {
    fail(ErrorCode::InvalidArgument, "movement count must be >= 1, got {}", num_movements);
  }
  if (!(max_rotation_deg >= 0.0) || !(max_translation_mm >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "motion bounds must be >= 0, got {} deg, {} mm",
         max_rotation_deg, max_translation_mm);
  }
  MotionPlan plan;
  const RngStream moves = rng.derive("moves");
  for (int m = 0; m < num_movements; ++m) {
    RngStream r = moves.derive(static_cast<std::uint64_t>(m));
    RigidMotion mv;
    mv.degrees = r.uniform(-1.0, 1.0) * max_rotation_deg;
    mv.tx_mm = r.uniform(-1.0, 1.0) * max_translation_mm;
    mv.ty_mm = r.uniform(-1.0, 1.0) * max_translation_mm;
    plan.moves.push_back(mv);
  }
  RngStream breaks = rng.derive("breakpoints");
  for (int m = 0; m < num_movements; ++m) plan.breakpoints.push_back(breaks.below(phase_lines + 1));
  std::sort(plan.breakpoints.begin(), plan.breakpoints.end());
  return plan;
}

Volume apply_motion(const Volume& volume, const MotionPlan& plan, int axis) {
  check_inplane(volume, "random motion");
  check_axis(axis);
  if (plan.moves.size() != plan.breakpoints.size()) {
    fail(ErrorCode::InvalidArgument, "motion plan has {} moves but {} breakpoints",
         plan.moves.size(), plan.breakpoints.size());
  }
  const Dims& d = volume.dims();
  const std::size_t n = d[static_cast<std::size_t>(axis)];
  if (!std::is_sorted(plan.breakpoints.begin(), plan.breakpoints.end()) ||
      (!plan.breakpoints.empty() && plan.breakpoints.back() > n)) {
    fail(ErrorCode::InvalidArgument, "motion breakpoints must be sorted and within [0, {}]", n);
  }

  // copy_of[line] = which copy supplies this unshifted phase line.
  std::vector<std::size_t> copy_of(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t copy = 0;
    while (copy < plan.breakpoints.size() && j >= plan.breakpoints[copy]) ++copy;
    const long k = static_cast<long>(j) - static_cast<long>(n / 2);
    copy_of[spectral::frequency_index(k, n)] = copy;
  }

  std::vector<Volume> copies;
  copies.reserve(plan.moves.size());
  for (const auto& mv : plan.moves) {
    copies.push_back(warp_volume(volume, rigid_warp(volume.grid(), mv.degrees, mv.tx_mm, mv.ty_mm),
                                 FillMode::ChannelMinimum));
  }

  const spectral::Shape shape{d.nx, d.ny, 1};
  const std::size_t plane = d.nx * d.ny;
  std::vector<cplx> moved(plane);
  return map_slice_spectra(volume, [&](std::span<cplx> spec, std::size_t c, std::size_t z) {
    for (std::size_t m = 0; m < copies.size(); ++m) {
      const auto src = copies[m].data().subspan(c * volume.channel_size() + z * plane, plane);
      for (std::size_t i = 0; i < plane; ++i) moved[i] = cplx(src[i], 0.0);
      spectral::forward(moved, shape);
      for (std::size_t y = 0; y < d.ny; ++y) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          if (copy_of[line_of(x, y, axis)] == m + 1) spec[y * d.nx + x] = moved[y * d.nx + x];
        }
      }
    }
  });
}

Volume random_motion(const Volume& volume, int num_movements, double max_rotation_deg,
                     double max_translation_mm, RngStream rng) {
  check_inplane(volume, "random motion");
  const MotionPlan plan = draw_motion_plan(volume.dims()[kPhaseAxis], num_movements,
                                           max_rotation_deg, max_translation_mm, rng);
  return apply_motion(volume, plan, kPhaseAxis);
}

}  // namespace mrk::corrupt
