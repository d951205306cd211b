#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mrk/core/volume.hpp"

namespace mrk::spectral {

/// Which spatial axes a spectrum covers: each z-slice separately (x, y) or
/// the whole volume (x, y, z).
enum class Axes { InPlane, Volume };

/// Unshifted puts DC at index 0 on every transformed axis; Centered puts it
/// at floor(n / 2).
enum class Layout { Unshifted, Centered };

/// Complex spectrum of a volume, one block per channel (and per slice for
/// in-plane spectra), stored in the same x-fastest order as the volume.
///
/// Convention: unnormalized forward transform, 1/N inverse.
class KSpace {
 public:
  KSpace(Grid grid, std::size_t channels, Axes axes, Layout layout,
         std::vector<std::complex<float>> data);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t channels() const noexcept { return channels_; }
  Axes axes() const noexcept { return axes_; }
  Layout layout() const noexcept { return layout_; }
  std::span<const std::complex<float>> data() const noexcept { return data_; }

  /// Points per transform (nx*ny for in-plane, nx*ny*nz for volume).
  std::size_t transform_size() const noexcept;

  friend bool operator==(const KSpace&, const KSpace&) = default;

 private:
  Grid grid_;
  std::size_t channels_;
  Axes axes_;
  Layout layout_;
  std::vector<std::complex<float>> data_;
};

KSpace fft_forward(const Volume& volume, Axes axes = Axes::InPlane);

struct InverseResult {
  Volume volume;
  /// Largest |imag| discarded when taking the real part.
  double imaginary_residue = 0.0;
};

InverseResult fft_inverse(const KSpace& kspace);

/// Cyclic shift by floor(n/2) along each transformed axis. Returns the input
/// unchanged when it is already in the requested layout.
KSpace shift_center(const KSpace& kspace);
KSpace unshift_center(const KSpace& kspace);

// Double-precision building blocks used by the corruption and augmentation
// kernels. Buffers are x-fastest; `shape` lists the transformed extents.

using cplx = std::complex<double>;

struct Shape {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;
  std::size_t size() const noexcept { return nx * ny * nz; }
};

/// In-place unnormalized forward DFT.
void forward(std::span<cplx> data, Shape shape);
/// In-place inverse DFT including the 1/N factor.
void inverse(std::span<cplx> data, Shape shape);

/// Signed frequency of unshifted index i on an axis of length n, in
/// [-floor(n/2), ceil(n/2) - 1].
inline long signed_frequency(std::size_t i, std::size_t n) {
  const auto si = static_cast<long>(i);
  const auto sn = static_cast<long>(n);
  return si < sn - sn / 2 ? si : si - sn;
}

/// Unshifted index of signed frequency k on an axis of length n.
inline std::size_t frequency_index(long k, std::size_t n) {
  const auto sn = static_cast<long>(n);
  return static_cast<std::size_t>(((k % sn) + sn) % sn);
}

/// Index of the Hermitian partner (-k mod n).
inline std::size_t mirror_index(std::size_t i, std::size_t n) {
  return i == 0 ? 0 : n - i;
}

}  // namespace mrk::spectral
