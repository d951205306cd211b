#pragma once

#include "mrk/core/volume.hpp"

namespace mrk {

/// Per-channel z-score. Corruptions operate on raw intensities; call this
/// afterwards if the consumer expects normalized input.
///
/// Throws DegenerateInput when a channel has zero variance.
Volume normalize_zscore(const Volume& volume);

}  // namespace mrk
