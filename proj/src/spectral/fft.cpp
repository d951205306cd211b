#include "mrk/spectral/fft.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include "mrk/core/error.hpp"

namespace mrk::spectral {
namespace {

// FFTW planning is not thread-safe; executing an existing plan on new arrays
// is. Plans are created once per (shape, direction) under a lock and kept for
// the life of the process.
class PlanCache {
 public:
  fftw_plan get(Shape shape, int sign) {
    const Key key{shape.nx, shape.ny, shape.nz, sign > 0 ? 1u : 0u};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::array<int, 3> n{};
    int rank = 0;
    // Slowest axis first.
    if (shape.nz > 1) n[rank++] = static_cast<int>(shape.nz);
    if (shape.ny > 1) n[rank++] = static_cast<int>(shape.ny);
    n[rank++] = static_cast<int>(shape.nx);
    fftw_complex* scratch = fftw_alloc_complex(shape.size());
    // ESTIMATE keeps plan selection, and therefore rounding, reproducible.
    fftw_plan plan =
        fftw_plan_dft(rank, n.data(), scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) {
      fail(ErrorCode::Unsupported, "FFTW could not plan a {}x{}x{} transform", shape.nx, shape.ny,
           shape.nz);
    }
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::array<std::size_t, 4>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(std::span<cplx> data, Shape shape, int sign) {
  if (data.size() != shape.size()) {
    fail(ErrorCode::InvalidArgument, "FFT buffer holds {} points, shape needs {}", data.size(),
         shape.size());
  }
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_cache().get(shape, sign), ptr, ptr);
}

Shape transform_shape(const Grid& grid, Axes axes) {
  return axes == Axes::InPlane ? Shape{grid.dims.nx, grid.dims.ny, 1}
                               : Shape{grid.dims.nx, grid.dims.ny, grid.dims.nz};
}

// Applies a cyclic shift of `sign * floor(n/2)` along each transformed axis.
KSpace cyclic_shift(const KSpace& k, bool to_centered) {
  const Shape shape = transform_shape(k.grid(), k.axes());
  const std::size_t block = shape.size();
  const auto src = k.data();
  std::vector<std::complex<float>> out(src.size());
  auto shift = [to_centered](std::size_t i, std::size_t n) {
    const std::size_t h = n / 2;
    return to_centered ? (i + h) % n : (i + n - h) % n;
  };
  for (std::size_t b = 0; b < src.size() / block; ++b) {
    const std::size_t base = b * block;
    for (std::size_t z = 0; z < shape.nz; ++z) {
      const std::size_t dz = shift(z, shape.nz);
      for (std::size_t y = 0; y < shape.ny; ++y) {
        const std::size_t dy = shift(y, shape.ny);
        for (std::size_t x = 0; x < shape.nx; ++x) {
          const std::size_t dx = shift(x, shape.nx);
          out[base + (dz * shape.ny + dy) * shape.nx + dx] =
              src[base + (z * shape.ny + y) * shape.nx + x];
        }
      }
    }
  }
  return KSpace(k.grid(), k.channels(), k.axes(), to_centered ? Layout::Centered : Layout::Unshifted,
                std::move(out));
}

}  // namespace

void forward(std::span<cplx> data, Shape shape) {
  execute(data, shape, FFTW_FORWARD);
}

void inverse(std::span<cplx> data, Shape shape) {
  execute(data, shape, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(shape.size());
  for (auto& v : data) v *= scale;
}

KSpace::KSpace(Grid grid, std::size_t channels, Axes axes, Layout layout,
               std::vector<std::complex<float>> data)
    : grid_(grid), channels_(channels), axes_(axes), layout_(layout), data_(std::move(data)) {
  grid_.validate();
  if (data_.size() != grid_.voxels() * channels_) {
    fail(ErrorCode::Validation, "k-space holds {} samples, grid needs {}", data_.size(),
         grid_.voxels() * channels_);
  }
}

std::size_t KSpace::transform_size() const noexcept {
  return transform_shape(grid_, axes_).size();
}

KSpace fft_forward(const Volume& volume, Axes axes) {
  const Dims& d = volume.dims();
  if (d.nx < 2 || d.ny < 2 || (axes == Axes::Volume && d.nz < 2)) {
    fail(ErrorCode::InvalidArgument, "transformed axes need at least 2 samples ({}x{}x{})", d.nx,
         d.ny, d.nz);
  }
  const Shape shape = transform_shape(volume.grid(), axes);
  const std::size_t block = shape.size();
  const auto src = volume.data();
  std::vector<std::complex<float>> out(src.size());
  std::vector<cplx> buffer(block);
  for (std::size_t b = 0; b < src.size() / block; ++b) {
    for (std::size_t i = 0; i < block; ++i) buffer[i] = cplx(src[b * block + i], 0.0);
    forward(buffer, shape);
    for (std::size_t i = 0; i < block; ++i) out[b * block + i] = std::complex<float>(buffer[i]);
  }
  return KSpace(volume.grid(), volume.channels(), axes, Layout::Unshifted, std::move(out));
}

InverseResult fft_inverse(const KSpace& kspace) {
  const KSpace k = unshift_center(kspace);
  const Shape shape = transform_shape(k.grid(), k.axes());
  const std::size_t block = shape.size();
  const auto src = k.data();
  std::vector<float> out(src.size());
  std::vector<cplx> buffer(block);
  double residue = 0.0;
  for (std::size_t b = 0; b < src.size() / block; ++b) {
    for (std::size_t i = 0; i < block; ++i) buffer[i] = cplx(src[b * block + i]);
    inverse(buffer, shape);
    for (std::size_t i = 0; i < block; ++i) {
      out[b * block + i] = static_cast<float>(buffer[i].real());
      residue = std::max(residue, std::abs(buffer[i].imag()));
    }
  }
  return InverseResult{Volume(k.grid(), k.channels(), std::move(out)), residue};
}

KSpace shift_center(const KSpace& kspace) {
  return kspace.layout() == Layout::Centered ? kspace : cyclic_shift(kspace, true);
}

KSpace unshift_center(const KSpace& kspace) {
  return kspace.layout() == Layout::Unshifted ? kspace : cyclic_shift(kspace, false);
}

}  // namespace mrk::spectral
