#pragma once

#include <optional>
#include <string_view>

#include "mrk/core/rng.hpp"
#include "mrk/core/volume.hpp"
#include "mrk/corruptions/operations.hpp"
#include "mrk/corruptions/severity_config.hpp"
#include "mrk/corruptions/transform_kind.hpp"

namespace mrk::corrupt {

/// Applies one transform at one severity. The output shares the input grid
/// and is a pure function of (volume, kind, severity, config, rng).
Volume apply_corruption(const Volume& volume, TransformKind kind, int severity,
                        const SeverityConfig& config, RngStream rng);

/// Same as apply_corruption; additionally resamples `labels` (nearest
/// neighbour) for transforms that move anatomy.
GeometricResult apply_corruption(const Volume& volume, const LabelMask* labels,
                                 TransformKind kind, int severity, const SeverityConfig& config,
                                 RngStream rng);

/// Applies a parameter set directly, bypassing the severity table.
GeometricResult apply_params(const Volume& volume, const LabelMask* labels, TransformKind kind,
                             const TransformParams& params, RngStream rng);

/// Stream used for one (case, transform, severity) cell of a corruption run:
/// seed / case_id / transform name / severity. The CLI and the Python module
/// both use it, so equal seeds give equal outputs on either path.
RngStream corruption_stream(std::uint64_t seed, std::string_view case_id, TransformKind kind,
                            int severity);

}  // namespace mrk::corrupt
