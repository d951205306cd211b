#include <algorithm>
#include <cmath>
#include <limits>

#include "mrk/core/error.hpp"
#include "mrk/core/stats.hpp"
#include "mrk/metrics/metrics.hpp"

namespace mrk::metrics {
namespace {

void check_grids(const LabelMask& a, const LabelMask& b) {
  if (!(a.grid().dims == b.grid().dims) || a.grid().spacing != b.grid().spacing) {
    fail(ErrorCode::GridMismatch, "prediction and reference masks live on different grids");
  }
}

// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher) with sample
// positions i * step.
void edt_1d(const double* f, std::size_t n, std::size_t stride, double step, double* out,
            std::vector<std::size_t>& v, std::vector<double>& z, std::vector<double>& g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) g[i] = f[i * stride];
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (g[q] == inf) continue;
    if (!any) {
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      k = 0;
      any = true;
      continue;
    }
    const double pq = static_cast<double>(q) * step;
    double s = 0.0;
    while (true) {
      const double pv = static_cast<double>(v[k]) * step;
      s = ((g[q] + pq * pq) - (g[v[k]] + pv * pv)) / (2.0 * (pq - pv));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (!any) {
    for (std::size_t i = 0; i < n; ++i) out[i] = inf;
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double pq = static_cast<double>(q) * step;
    while (z[k + 1] < pq) ++k;
    const double d = pq - static_cast<double>(v[k]) * step;
    out[q] = d * d + g[v[k]];
  }
}

}  // namespace

double dsc(const LabelMask& pred, const LabelMask& gt, std::uint32_t structure) {
  check_grids(pred, gt);
  const auto p = pred.labels();
  const auto g = gt.labels();
  std::size_t np = 0;
  std::size_t ng = 0;
  std::size_t both = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] == structure;
    const bool b = g[i] == structure;
    np += a;
    ng += b;
    both += a && b;
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(np + ng);
}

std::vector<std::size_t> boundary_voxels(const LabelMask& mask, std::uint32_t structure) {
  const Dims& d = mask.grid().dims;
  const auto l = mask.labels();
  std::vector<std::size_t> out;
  auto inside = [&](std::size_t x, std::size_t y, std::size_t z) {
    return l[(z * d.ny + y) * d.nx + x] == structure;
  };
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x, ++i) {
        if (l[i] != structure) continue;
        const bool edge = x == 0 || x + 1 == d.nx || y == 0 || y + 1 == d.ny || z == 0 ||
                          z + 1 == d.nz || !inside(x - 1, y, z) || !inside(x + 1, y, z) ||
                          !inside(x, y - 1, z) || !inside(x, y + 1, z) || !inside(x, y, z - 1) ||
                          !inside(x, y, z + 1);
        if (edge) out.push_back(i);
      }
    }
  }
  return out;
}

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature,
                                               const Grid& grid) {
  const Dims& d = grid.dims;
  if (feature.size() != d.voxels()) {
    fail(ErrorCode::GridMismatch, "feature map has {} voxels, grid {}", feature.size(), d.voxels());
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) dist[i] = feature[i] ? 0.0 : inf;

  const std::size_t longest = std::max({d.nx, d.ny, d.nz});
  std::vector<std::size_t> v(longest);
  std::vector<double> z(longest + 1);
  std::vector<double> g(longest);
  std::vector<double> line(longest);
  const std::array<std::size_t, 3> stride{1, d.nx, d.nx * d.ny};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t n = d[axis];
    if (n == 1) continue;
    const std::size_t lines = d.voxels() / n;
    for (std::size_t l = 0; l < lines; ++l) {
      std::size_t base = 0;
      if (axis == 0) {
        base = l * d.nx;
      } else if (axis == 1) {
        base = (l / d.nx) * d.nx * d.ny + (l % d.nx);
      } else {
        base = l;
      }
      edt_1d(dist.data() + base, n, stride[axis], grid.spacing[axis], line.data(), v, z, g);
      for (std::size_t i = 0; i < n; ++i) dist[base + i * stride[axis]] = line[i];
    }
  }
  return dist;
}

std::optional<double> hd95(const LabelMask& pred, const LabelMask& gt, std::uint32_t structure) {
  check_grids(pred, gt);
  const auto bp = boundary_voxels(pred, structure);
  const auto bg = boundary_voxels(gt, structure);
  if (bp.empty() || bg.empty()) return std::nullopt;

  auto directed = [&](const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    std::vector<std::uint8_t> feature(pred.grid().voxels(), 0);
    for (std::size_t i : to) feature[i] = 1;
    const auto dist = squared_distance_transform(feature, pred.grid());
    std::vector<double> d;
    d.reserve(from.size());
    for (std::size_t i : from) d.push_back(std::sqrt(dist[i]));
    return percentile(std::move(d), 0.95);
  };
  return std::max(directed(bp, bg), directed(bg, bp));
}

}  // namespace mrk::metrics
