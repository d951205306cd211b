#include "mrk/core/volume.hpp"

#include <cmath>

#include "mrk/core/error.hpp"

namespace mrk {

Volume::Volume(Grid grid, std::size_t channels, std::vector<float> data)
    : grid_(grid), channels_(channels), data_(std::move(data)) {
  grid_.validate();
  if (channels_ == 0) {
    fail(ErrorCode::Validation, "volume needs at least one channel");
  }
  if (data_.size() != grid_.voxels() * channels_) {
    fail(ErrorCode::Validation, "volume data length {} != {} voxels x {} channels", data_.size(),
         grid_.voxels(), channels_);
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      fail(ErrorCode::Validation, "non-finite voxel value at index {}", i);
    }
  }
}

Volume Volume::filled(Grid grid, std::size_t channels, float value) {
  return Volume(grid, channels, std::vector<float>(grid.voxels() * channels, value));
}

LabelMask::LabelMask(Grid grid, std::vector<std::uint32_t> labels, std::uint32_t num_classes)
    : grid_(grid), labels_(std::move(labels)), num_classes_(num_classes) {
  grid_.validate();
  if (num_classes_ < 2) {
    fail(ErrorCode::Validation, "label mask needs at least 2 classes, got {}", num_classes_);
  }
  if (labels_.size() != grid_.voxels()) {
    fail(ErrorCode::Validation, "label data length {} != {} voxels", labels_.size(), grid_.voxels());
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      fail(ErrorCode::Validation, "label {} at index {} is not below class count {}", labels_[i], i,
           num_classes_);
    }
  }
}

ProbMask::ProbMask(Grid grid, std::size_t num_classes, std::vector<float> probs)
    : grid_(grid), num_classes_(num_classes), probs_(std::move(probs)) {
  grid_.validate();
  if (num_classes_ < 2) {
    fail(ErrorCode::Validation, "probability mask needs at least 2 classes, got {}", num_classes_);
  }
  const std::size_t n = grid_.voxels();
  if (probs_.size() != n * num_classes_) {
    fail(ErrorCode::Validation, "probability data length {} != {} voxels x {} classes",
         probs_.size(), n, num_classes_);
  }
  for (std::size_t v = 0; v < n; ++v) {
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes_; ++c) {
      const float p = probs_[c * n + v];
      if (!(p >= 0.0f && p <= 1.0f)) {
        fail(ErrorCode::Validation, "probability {} outside [0,1] at voxel {}, class {}", p, v, c);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      fail(ErrorCode::Validation, "class probabilities at voxel {} sum to {}", v, sum);
    }
  }
}

ProbMask one_hot(const LabelMask& mask) {
  const std::size_t n = mask.grid().voxels();
  const std::size_t classes = mask.num_classes();
  std::vector<float> probs(n * classes, 0.0f);
  const auto labels = mask.labels();
  for (std::size_t v = 0; v < n; ++v) {
    probs[labels[v] * n + v] = 1.0f;
  }
  return ProbMask(mask.grid(), classes, std::move(probs));
}

LabelMask argmax(const ProbMask& probs) {
  const std::size_t n = probs.grid().voxels();
  const auto data = probs.probs();
  std::vector<std::uint32_t> labels(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    float best = data[v];
    for (std::size_t c = 1; c < probs.num_classes(); ++c) {
      if (data[c * n + v] > best) {
        best = data[c * n + v];
        labels[v] = static_cast<std::uint32_t>(c);
      }
    }
  }
  return LabelMask(probs.grid(), std::move(labels), static_cast<std::uint32_t>(probs.num_classes()));
}

}  // namespace mrk
