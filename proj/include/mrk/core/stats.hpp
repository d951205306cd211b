#pragma once

#include <span>
#include <vector>

#include "mrk/core/volume.hpp"

namespace mrk {

/// Percentile with linear interpolation between order statistics
/// (position q * (n - 1)). `q` is in [0, 1]; `values` must be nonempty.
double percentile(std::span<const float> values, double q);
double percentile(std::vector<double> values, double q);

/// 1st and 99th percentile of one channel.
struct IntensityRange {
  double low = 0.0;
  double high = 0.0;
  double width() const noexcept { return high - low; }
};

IntensityRange robust_range(std::span<const float> channel);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Two-pass mean and population standard deviation.
MeanStd mean_std(std::span<const float> values);

/// Root-mean-square difference divided by the intensity range (max - min)
/// of `reference`.
double nrmse(const Volume& candidate, const Volume& reference);

}  // namespace mrk
