#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mrk/core/grid.hpp"

namespace mrk {

/// Dense multi-channel scalar image. Layout is channel-major, then z, y, x
/// with x fastest (NIfTI order). Immutable once constructed.
class Volume {
 public:
  /// Validates the grid, the data length and finiteness of every sample.
  Volume(Grid grid, std::size_t channels, std::vector<float> data);

  /// Single-channel volume filled with `value`.
  static Volume filled(Grid grid, std::size_t channels, float value);

  const Grid& grid() const noexcept { return grid_; }
  const Dims& dims() const noexcept { return grid_.dims; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t channel_size() const noexcept { return grid_.voxels(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> channel(std::size_t c) const noexcept {
    return std::span<const float>(data_).subspan(c * channel_size(), channel_size());
  }
  float at(std::size_t c, std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return data_[c * channel_size() + grid_.index(x, y, z)];
  }

  /// Same grid and channel count, new samples.
  Volume with_data(std::vector<float> data) const { return Volume(grid_, channels_, std::move(data)); }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Grid grid_;
  std::size_t channels_;
  std::vector<float> data_;
};

/// Integer segmentation on a volume grid; class 0 is background.
class LabelMask {
 public:
  LabelMask(Grid grid, std::vector<std::uint32_t> labels, std::uint32_t num_classes);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::uint32_t num_classes() const noexcept { return num_classes_; }
  std::uint32_t at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return labels_[grid_.index(x, y, z)];
  }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  Grid grid_;
  std::vector<std::uint32_t> labels_;
  std::uint32_t num_classes_;
};

/// Per-class probability planes (class-major). Each voxel's class column is
/// within [0, 1] and sums to 1 within 1e-6.
class ProbMask {
 public:
  ProbMask(Grid grid, std::size_t num_classes, std::vector<float> probs);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::span<const float> probs() const noexcept { return probs_; }
  std::span<const float> plane(std::size_t c) const noexcept {
    return std::span<const float>(probs_).subspan(c * grid_.voxels(), grid_.voxels());
  }

  friend bool operator==(const ProbMask&, const ProbMask&) = default;

 private:
  Grid grid_;
  std::size_t num_classes_;
  std::vector<float> probs_;
};

/// Sum-to-one tolerance enforced by ProbMask.
inline constexpr double kProbSumTolerance = 1e-6;

ProbMask one_hot(const LabelMask& mask);

/// Per-voxel most probable class; ties resolve to the lower class id.
LabelMask argmax(const ProbMask& probs);

/// An image together with its soft segmentation target.
struct Sample {
  Volume image;
  ProbMask mask;

  friend bool operator==(const Sample&, const Sample&) = default;
};

}  // namespace mrk
