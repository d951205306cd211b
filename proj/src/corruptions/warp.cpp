#include "mrk/corruptions/warp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mrk/core/error.hpp"

namespace mrk::corrupt {
namespace {

bool outside(const Vec3& s, const Dims& d) {
  for (std::size_t a = 0; a < 3; ++a) {
    const double n = static_cast<double>(d[a]);
    if (s[a] < -0.5 || s[a] > n - 0.5) return true;
  }
  return false;
}

// Trilinear interpolation with the position clamped to the grid.
double trilinear(std::span<const float> plane, const Dims& d, const Vec3& s) {
  std::array<std::size_t, 3> i0{};
  std::array<std::size_t, 3> i1{};
  std::array<double, 3> t{};
  for (std::size_t a = 0; a < 3; ++a) {
    const double hi = static_cast<double>(d[a] - 1);
    const double p = std::clamp(s[a], 0.0, hi);
    const double f = std::floor(p);
    i0[a] = static_cast<std::size_t>(f);
    i1[a] = std::min(i0[a] + 1, d[a] - 1);
    t[a] = p - f;
  }
  auto at = [&](std::size_t x, std::size_t y, std::size_t z) -> double {
    return plane[(z * d.ny + y) * d.nx + x];
  };
  const double c00 = at(i0[0], i0[1], i0[2]) * (1 - t[0]) + at(i1[0], i0[1], i0[2]) * t[0];
  const double c10 = at(i0[0], i1[1], i0[2]) * (1 - t[0]) + at(i1[0], i1[1], i0[2]) * t[0];
  const double c01 = at(i0[0], i0[1], i1[2]) * (1 - t[0]) + at(i1[0], i0[1], i1[2]) * t[0];
  const double c11 = at(i0[0], i1[1], i1[2]) * (1 - t[0]) + at(i1[0], i1[1], i1[2]) * t[0];
  const double c0 = c00 * (1 - t[1]) + c10 * t[1];
  const double c1 = c01 * (1 - t[1]) + c11 * t[1];
  return c0 * (1 - t[2]) + c1 * t[2];
}

template <typename Fn>
void for_each_source(const Warp& warp, const Dims& d, Fn&& fn) {
  std::visit(
      [&](const auto& w) {
        std::size_t i = 0;
        for (std::size_t z = 0; z < d.nz; ++z) {
          for (std::size_t y = 0; y < d.ny; ++y) {
            for (std::size_t x = 0; x < d.nx; ++x, ++i) fn(i, w.source(x, y, z));
          }
        }
      },
      warp);
}

void check_warp_dims(const Warp& warp, const Dims& d) {
  if (const auto* dw = std::get_if<DisplacementWarp>(&warp); dw && !(dw->dims == d)) {
    fail(ErrorCode::GridMismatch, "displacement field does not match the image grid");
  }
}

// In-plane affine in index space built from a physical-space map:
// source_mm = R(-degrees) * (p_mm - t) / zoom, relative to the slice centre.
AffineWarp inplane_affine(const Grid& grid, double degrees, double tx_mm, double ty_mm, double zoom) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta) / zoom;
  const double s = std::sin(theta) / zoom;
  const double sx = grid.spacing[0];
  const double sy = grid.spacing[1];
  const double cx = (static_cast<double>(grid.dims.nx) - 1.0) / 2.0;
  const double cy = (static_cast<double>(grid.dims.ny) - 1.0) / 2.0;
  // With u = (x - cx) * sx - tx and v = (y - cy) * sy - ty:
  //   src_x = cx + ( c*u + s*v) / sx
  //   src_y = cy + (-s*u + c*v) / sy
  // Offsets are grouped so the identity map has exactly zero offset.
  AffineWarp w;
  const double ox = cx - c * cx - s * (sy / sx) * cy - (c * tx_mm + s * ty_mm) / sx;
  const double oy = cy + s * (sx / sy) * cx - c * cy - (-s * tx_mm + c * ty_mm) / sy;
  w.m = {c, s * sy / sx, 0.0, ox, -s * sx / sy, c, 0.0, oy, 0.0, 0.0, 1.0, 0.0};
  return w;
}

// Linear resampling of one axis from length n to m, sampling at voxel
// centres: position (i + 0.5) * n / m - 0.5.
std::vector<double> resample_axis(const std::vector<double>& in, Dims d, int axis, std::size_t m) {
  const std::size_t n = d[axis];
  Dims out_dims = d;
  (axis == 0 ? out_dims.nx : axis == 1 ? out_dims.ny : out_dims.nz) = m;
  std::vector<double> out(out_dims.voxels());

  std::vector<std::size_t> lo(m);
  std::vector<std::size_t> hi(m);
  std::vector<double> t(m);
  const double scale = static_cast<double>(n) / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0,
                                static_cast<double>(n - 1));
    lo[i] = static_cast<std::size_t>(std::floor(p));
    hi[i] = std::min(lo[i] + 1, n - 1);
    t[i] = p - std::floor(p);
  }
  const std::size_t in_stride = axis == 0 ? 1 : axis == 1 ? d.nx : d.nx * d.ny;
  for (std::size_t z = 0; z < out_dims.nz; ++z) {
    for (std::size_t y = 0; y < out_dims.ny; ++y) {
      for (std::size_t x = 0; x < out_dims.nx; ++x) {
        const std::size_t j = axis == 0 ? x : axis == 1 ? y : z;
        // Base index of this line in the input with the resampled coordinate at 0.
        const std::size_t bx = axis == 0 ? 0 : x;
        const std::size_t by = axis == 1 ? 0 : y;
        const std::size_t bz = axis == 2 ? 0 : z;
        const std::size_t base = (bz * d.ny + by) * d.nx + bx;
        const double a = in[base + lo[j] * in_stride];
        const double b = in[base + hi[j] * in_stride];
        out[(z * out_dims.ny + y) * out_dims.nx + x] = a * (1.0 - t[j]) + b * t[j];
      }
    }
  }
  return out;
}

}  // namespace

Volume warp_volume(const Volume& volume, const Warp& warp, FillMode fill) {
  const Dims& d = volume.dims();
  check_warp_dims(warp, d);
  const std::size_t n = volume.channel_size();
  std::vector<float> out(volume.data().size());
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    const auto plane = volume.channel(c);
    const float fill_value = *std::min_element(plane.begin(), plane.end());
    for_each_source(warp, d, [&](std::size_t i, const Vec3& s) {
      if (fill == FillMode::ChannelMinimum && outside(s, d)) {
        out[c * n + i] = fill_value;
      } else {
        out[c * n + i] = static_cast<float>(trilinear(plane, d, s));
      }
    });
  }
  return volume.with_data(std::move(out));
}

LabelMask warp_labels(const LabelMask& mask, const Warp& warp, FillMode fill) {
  const Dims& d = mask.grid().dims;
  check_warp_dims(warp, d);
  const auto labels = mask.labels();
  std::vector<std::uint32_t> out(labels.size(), 0);
  for_each_source(warp, d, [&](std::size_t i, const Vec3& s) {
    if (fill == FillMode::ChannelMinimum && outside(s, d)) return;
    std::array<std::size_t, 3> idx{};
    for (std::size_t a = 0; a < 3; ++a) {
      const double p = std::clamp(std::floor(s[a] + 0.5), 0.0, static_cast<double>(d[a] - 1));
      idx[a] = static_cast<std::size_t>(p);
    }
    out[i] = labels[(idx[2] * d.ny + idx[1]) * d.nx + idx[0]];
  });
  return LabelMask(mask.grid(), std::move(out), mask.num_classes());
}

ProbMask warp_probs(const ProbMask& probs, const Warp& warp, FillMode fill) {
  const Dims& d = probs.grid().dims;
  check_warp_dims(warp, d);
  const std::size_t n = d.voxels();
  const std::size_t classes = probs.num_classes();
  std::vector<double> acc(n * classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto plane = probs.plane(c);
    for_each_source(warp, d, [&](std::size_t i, const Vec3& s) {
      if (fill == FillMode::ChannelMinimum && outside(s, d)) {
        acc[c * n + i] = c == 0 ? 1.0 : 0.0;
      } else {
        acc[c * n + i] = std::max(0.0, trilinear(plane, d, s));
      }
    });
  }
  std::vector<float> out(n * classes);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += acc[c * n + i];
    for (std::size_t c = 0; c < classes; ++c) {
      out[c * n + i] = static_cast<float>(std::min(1.0, acc[c * n + i] / sum));
    }
  }
  return ProbMask(probs.grid(), classes, std::move(out));
}

AffineWarp rotation_warp(const Grid& grid, double degrees) {
  return inplane_affine(grid, degrees, 0.0, 0.0, 1.0);
}

AffineWarp zoom_warp(const Grid& grid, double zoom) {
  if (!(zoom > 0.0)) fail(ErrorCode::InvalidArgument, "zoom factor must be positive, got {}", zoom);
  return inplane_affine(grid, 0.0, 0.0, 0.0, zoom);
}

AffineWarp rigid_warp(const Grid& grid, double degrees, double tx_mm, double ty_mm) {
  return inplane_affine(grid, degrees, tx_mm, ty_mm, 1.0);
}

AffineWarp flip_warp(const Grid& grid, int axis) {
  if (axis < 0 || axis > 2) fail(ErrorCode::InvalidArgument, "flip axis {} out of range", axis);
  AffineWarp w;
  const auto a = static_cast<std::size_t>(axis);
  w.m[a * 4 + a] = -1.0;
  w.m[a * 4 + 3] = static_cast<double>(grid.dims[a] - 1);
  return w;
}

DisplacementWarp elastic_warp(const Grid& grid, double max_displacement_mm, int control_points,
                              RngStream rng) {
  if (max_displacement_mm < 0.0) {
    fail(ErrorCode::InvalidArgument, "max displacement must be >= 0, got {}", max_displacement_mm);
  }
  if (control_points < 2) {
    fail(ErrorCode::InvalidArgument, "elastic control grid needs >= 2 points per axis, got {}",
         control_points);
  }
  const auto g = static_cast<std::size_t>(control_points);
  const Dims& d = grid.dims;

  // Control displacements in voxel units, [axis][cz][cy][cx].
  std::array<std::vector<double>, 3> ctrl;
  for (auto& c : ctrl) c.assign(g * g * g, 0.0);
  for (std::size_t i = 0; i < g * g * g; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      const double mm = rng.uniform(-max_displacement_mm, max_displacement_mm);
      ctrl[a][i] = d[a] > 1 ? mm / grid.spacing[a] : 0.0;
    }
  }

  // Per-axis interpolation weights from voxel index to control index.
  struct Stencil {
    std::size_t lo, hi;
    double t;
  };
  auto stencil = [g](std::size_t n) {
    std::vector<Stencil> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = n > 1 ? static_cast<double>(i) * static_cast<double>(g - 1) /
                                   static_cast<double>(n - 1)
                             : 0.0;
      const auto lo = std::min(static_cast<std::size_t>(std::floor(p)), g - 1);
      out[i] = {lo, std::min(lo + 1, g - 1), p - static_cast<double>(lo)};
    }
    return out;
  };
  const auto sx = stencil(d.nx);
  const auto sy = stencil(d.ny);
  const auto sz = stencil(d.nz);

  DisplacementWarp warp;
  warp.dims = d;
  std::array<std::vector<float>*, 3> dst{&warp.dx, &warp.dy, &warp.dz};
  for (auto* v : dst) v->assign(d.voxels(), 0.0f);
  auto cidx = [g](std::size_t x, std::size_t y, std::size_t z) { return (z * g + y) * g + x; };
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x, ++i) {
        const auto& a = sx[x];
        const auto& b = sy[y];
        const auto& c = sz[z];
        for (std::size_t axis = 0; axis < 3; ++axis) {
          const auto& f = ctrl[axis];
          const double c00 = f[cidx(a.lo, b.lo, c.lo)] * (1 - a.t) + f[cidx(a.hi, b.lo, c.lo)] * a.t;
          const double c10 = f[cidx(a.lo, b.hi, c.lo)] * (1 - a.t) + f[cidx(a.hi, b.hi, c.lo)] * a.t;
          const double c01 = f[cidx(a.lo, b.lo, c.hi)] * (1 - a.t) + f[cidx(a.hi, b.lo, c.hi)] * a.t;
          const double c11 = f[cidx(a.lo, b.hi, c.hi)] * (1 - a.t) + f[cidx(a.hi, b.hi, c.hi)] * a.t;
          const double v = (c00 * (1 - b.t) + c10 * b.t) * (1 - c.t) + (c01 * (1 - b.t) + c11 * b.t) * c.t;
          (*dst[axis])[i] = static_cast<float>(v);
        }
      }
    }
  }
  return warp;
}

Volume downsample_restore(const Volume& volume, const Vec3& factors) {
  const Dims d = volume.dims();
  std::array<std::size_t, 3> reduced{};
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(factors[a] >= 1.0)) {
      fail(ErrorCode::InvalidArgument, "downsampling factor must be >= 1, got {}", factors[a]);
    }
    const double m = std::round(static_cast<double>(d[a]) / factors[a]);
    reduced[a] = std::max<std::size_t>(1, static_cast<std::size_t>(m));
  }
  const std::size_t n = volume.channel_size();
  std::vector<float> out(volume.data().size());
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    const auto plane = volume.channel(c);
    std::vector<double> work(plane.begin(), plane.end());
    Dims cur = d;
    for (int a = 0; a < 3; ++a) {
      if (reduced[a] == d[a]) continue;
      work = resample_axis(work, cur, a, reduced[a]);
      (a == 0 ? cur.nx : a == 1 ? cur.ny : cur.nz) = reduced[a];
    }
    for (int a = 0; a < 3; ++a) {
      if (reduced[a] == d[a]) continue;
      work = resample_axis(work, cur, a, d[a]);
      (a == 0 ? cur.nx : a == 1 ? cur.ny : cur.nz) = d[a];
    }
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = static_cast<float>(work[i]);
  }
  return volume.with_data(std::move(out));
}

}  // namespace mrk::corrupt
