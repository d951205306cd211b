#include <algorithm>
#include <cmath>

#include "mrk/core/error.hpp"
#include "mrk/core/stats.hpp"
#include "mrk/corruptions/operations.hpp"

namespace mrk::corrupt {

Volume rician_noise(const Volume& volume, double sigma, RngStream rng, NoiseScale scale) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    fail(ErrorCode::InvalidArgument, "rician sigma must be finite and >= 0, got {}", sigma);
  }
  if (sigma == 0.0) return volume;
  const std::size_t n = volume.channel_size();
  std::vector<float> out(volume.data().size());
  RngStream noise = rng.derive("noise");
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    const auto plane = volume.channel(c);
    const double s = scale == NoiseScale::Absolute ? sigma : sigma * robust_range(plane).width();
    if (s == 0.0) {
      std::copy(plane.begin(), plane.end(), out.begin() + static_cast<std::ptrdiff_t>(c * n));
      continue;
    }
    RngStream r = noise.derive(static_cast<std::uint64_t>(c));
    for (std::size_t i = 0; i < n; ++i) {
      const double n1 = r.normal() * s;
      const double n2 = r.normal() * s;
      const double real = plane[i] + n1;
      out[c * n + i] = static_cast<float>(std::sqrt(real * real + n2 * n2));
    }
  }
  return volume.with_data(std::move(out));
}

double normalized_coordinate(std::size_t i, std::size_t n) {
  if (n <= 1) return 0.0;
  return 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
}

double BiasPolynomial::evaluate(double u, double v, double w) const {
  double sum = 0.0;
  for (const auto& t : terms) {
    sum += t.coefficient * std::pow(u, t.px) * std::pow(v, t.py) * std::pow(w, t.pz);
  }
  return sum;
}

BiasPolynomial draw_bias_polynomial(int order, double magnitude, RngStream rng) {
  if (order < 1) fail(ErrorCode::InvalidArgument, "bias field order must be >= 1, got {}", order);
  if (!(magnitude >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "bias field magnitude must be >= 0, got {}", magnitude);
  }
  BiasPolynomial poly;
  for (int pz = 0; pz <= order; ++pz) {
    for (int py = 0; py + pz <= order; ++py) {
      for (int px = 0; px + py + pz <= order; ++px) {
        // Unit draws scaled afterwards so equal streams give proportional fields.
        const double u = rng.uniform(-1.0, 1.0);
        poly.terms.push_back({px, py, pz, u * magnitude});
      }
    }
  }
  return poly;
}

Volume apply_bias_field(const Volume& volume, const BiasPolynomial& poly) {
  const Dims& d = volume.dims();
  const std::size_t n = volume.channel_size();
  int order = 0;
  for (const auto& t : poly.terms) order = std::max({order, t.px, t.py, t.pz});
  const auto stride = static_cast<std::size_t>(order + 1);
  auto powers = [&](std::size_t len) {
    std::vector<double> table(len * stride);
    for (std::size_t i = 0; i < len; ++i) {
      const double c = normalized_coordinate(i, len);
      double p = 1.0;
      for (std::size_t e = 0; e < stride; ++e, p *= c) table[i * stride + e] = p;
    }
    return table;
  };
  const auto pu = powers(d.nx);
  const auto pv = powers(d.ny);
  const auto pw = powers(d.nz);

  std::vector<double> field(n);
  std::vector<double> row_coeff(poly.terms.size());
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t t = 0; t < poly.terms.size(); ++t) {
        const auto& term = poly.terms[t];
        row_coeff[t] = term.coefficient * pv[y * stride + static_cast<std::size_t>(term.py)] *
                       pw[z * stride + static_cast<std::size_t>(term.pz)];
      }
      for (std::size_t x = 0; x < d.nx; ++x, ++i) {
        double sum = 0.0;
        for (std::size_t t = 0; t < poly.terms.size(); ++t) {
          sum += row_coeff[t] * pu[x * stride + static_cast<std::size_t>(poly.terms[t].px)];
        }
        field[i] = std::exp(sum);
      }
    }
  }
  const auto data = volume.data();
  std::vector<float> out(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    out[j] = static_cast<float>(data[j] * field[j % n]);
  }
  return volume.with_data(std::move(out));
}

Volume bias_field(const Volume& volume, double magnitude, int order, RngStream rng) {
  const BiasPolynomial poly = draw_bias_polynomial(order, magnitude, rng);
  if (magnitude == 0.0) return volume;
  return apply_bias_field(volume, poly);
}

Volume gamma_map(const Volume& volume, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(ErrorCode::InvalidArgument, "gamma must be finite and > 0, got {}", gamma);
  }
  const std::size_t n = volume.channel_size();
  std::vector<float> out(volume.data().begin(), volume.data().end());
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    const auto plane = volume.channel(c);
    const IntensityRange r = robust_range(plane);
    if (!(r.width() > 0.0)) {
      fail(ErrorCode::DegenerateInput, "channel {} has p1 == p99 ({}); gamma map undefined", c,
           r.low);
    }
    if (gamma == 1.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = plane[i];
      if (x < r.low || x > r.high) continue;
      const double u = (x - r.low) / r.width();
      out[c * n + i] = static_cast<float>(r.low + r.width() * std::pow(u, gamma));
    }
  }
  return volume.with_data(std::move(out));
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-t * t / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

void convolve_axis(std::vector<double>& data, const Dims& d, std::size_t axis,
                   const std::vector<double>& kernel) {
  const std::size_t n = d[axis];
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? d.nx : d.nx * d.ny;
  const auto radius = static_cast<long>(kernel.size() / 2);
  std::vector<double> line(n);
  std::vector<double> result(n);
  const std::size_t lines = d.voxels() / n;
  for (std::size_t l = 0; l < lines; ++l) {
    // Decompose the line number into the two remaining coordinates.
    std::size_t base = 0;
    if (axis == 0) {
      base = l * d.nx;
    } else if (axis == 1) {
      base = (l / d.nx) * d.nx * d.ny + (l % d.nx);
    } else {
      base = l;
    }
    for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (long k = -radius; k <= radius; ++k) {
        const long j = std::clamp(static_cast<long>(i) + k, 0L, static_cast<long>(n) - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * line[static_cast<std::size_t>(j)];
      }
      result[i] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = result[i];
  }
}

}  // namespace

Volume gaussian_smooth(const Volume& volume, double sigma_mm) {
  if (!(sigma_mm >= 0.0) || !std::isfinite(sigma_mm)) {
    fail(ErrorCode::InvalidArgument, "smoothing sigma must be finite and >= 0, got {}", sigma_mm);
  }
  if (sigma_mm == 0.0) return volume;
  const Dims& d = volume.dims();
  const std::size_t n = volume.channel_size();
  std::vector<float> out(volume.data().size());
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    const auto plane = volume.channel(c);
    std::vector<double> work(plane.begin(), plane.end());
    for (std::size_t a = 0; a < 3; ++a) {
      if (d[a] < 2) continue;
      const double sigma = sigma_mm / volume.grid().spacing[a];
      convolve_axis(work, d, a, gaussian_kernel(sigma));
    }
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = static_cast<float>(work[i]);
  }
  return volume.with_data(std::move(out));
}

Volume intensity_map(const Volume& volume, IntensityMode mode, double param) {
  switch (mode) {
    case IntensityMode::GammaCompress:
    case IntensityMode::GammaExpand:
      return gamma_map(volume, param);
    case IntensityMode::Smooth:
      return gaussian_smooth(volume, param);
  }
  fail(ErrorCode::InvalidArgument, "unknown intensity mode");
}

}  // namespace mrk::corrupt
