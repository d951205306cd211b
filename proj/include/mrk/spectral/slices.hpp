#pragma once

#include <span>
#include <vector>

#include "mrk/core/volume.hpp"
#include "mrk/spectral/fft.hpp"

namespace mrk::spectral {

/// Runs fn(spectrum, channel, slice) on the unshifted in-plane spectrum of
/// every slice and returns the real part of the inverse transforms.
template <typename Fn>
Volume map_slice_spectra(const Volume& volume, Fn&& fn) {
  const Dims& d = volume.dims();
  const Shape shape{d.nx, d.ny, 1};
  const std::size_t plane = d.nx * d.ny;
  std::vector<float> out(volume.data().size());
  std::vector<cplx> buf(plane);
  const auto data = volume.data();
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    for (std::size_t z = 0; z < d.nz; ++z) {
      const std::size_t base = c * volume.channel_size() + z * plane;
      for (std::size_t i = 0; i < plane; ++i) buf[i] = cplx(data[base + i], 0.0);
      forward(buf, shape);
      fn(std::span<cplx>(buf), c, z);
      inverse(buf, shape);
      for (std::size_t i = 0; i < plane; ++i) out[base + i] = static_cast<float>(buf[i].real());
    }
  }
  return volume.with_data(std::move(out));
}

}  // namespace mrk::spectral
