#include "mrk/core/grid.hpp"

#include <cmath>

#include "mrk/core/error.hpp"

namespace mrk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Format: return "format";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::DegenerateInput: return "degenerate-input";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::GridMismatch: return "grid-mismatch";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Overflow: return "overflow";
  }
  return "unknown";
}

void log_warning(std::string_view message) {
  fmt::print(stderr, "mrk: warning: {}\n", message);
}

Affine diagonal_affine(const Vec3& spacing) {
  return {spacing[0], 0, 0, 0,  //
          0, spacing[1], 0, 0,  //
          0, 0, spacing[2], 0,  //
          0, 0, 0, 1};
}

Grid Grid::with_spacing(Dims dims, Vec3 spacing) {
  return Grid{dims, spacing, diagonal_affine(spacing)};
}

void Grid::validate() const {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) {
    fail(ErrorCode::Validation, "grid has a zero dimension ({}x{}x{})", dims.nx, dims.ny, dims.nz);
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      fail(ErrorCode::Validation, "spacing[{}] = {} is not strictly positive", a, spacing[a]);
    }
  }
  const auto& m = affine;
  const double det = m[0] * (m[5] * m[10] - m[6] * m[9]) - m[1] * (m[4] * m[10] - m[6] * m[8]) +
                     m[2] * (m[4] * m[9] - m[5] * m[8]);
  if (!std::isfinite(det) || std::abs(det) < 1e-12) {
    fail(ErrorCode::Validation, "affine 3x3 block is singular (det = {})", det);
  }
}

}  // namespace mrk
