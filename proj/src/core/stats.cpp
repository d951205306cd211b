#include "mrk/core/stats.hpp"

#include <algorithm>
#include <cmath>

#include "mrk/core/error.hpp"

namespace mrk {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    fail(ErrorCode::InvalidArgument, "percentile of an empty sample");
  }
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (b - a) * (pos - static_cast<double>(lo));
}

double percentile(std::span<const float> values, double q) {
  return percentile(std::vector<double>(values.begin(), values.end()), q);
}

IntensityRange robust_range(std::span<const float> channel) {
  std::vector<double> values(channel.begin(), channel.end());
  IntensityRange range;
  range.low = percentile(values, 0.01);
  range.high = percentile(std::move(values), 0.99);
  return range;
}

MeanStd mean_std(std::span<const float> values) {
  if (values.empty()) {
    fail(ErrorCode::InvalidArgument, "mean of an empty sample");
  }
  double sum = 0.0;
  for (float v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (float v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

double nrmse(const Volume& candidate, const Volume& reference) {
  if (!(candidate.grid() == reference.grid()) || candidate.channels() != reference.channels()) {
    fail(ErrorCode::GridMismatch, "nrmse operands differ in grid or channel count");
  }
  const auto a = candidate.data();
  const auto b = reference.data();
  const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
  const double range = static_cast<double>(*hi) - static_cast<double>(*lo);
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    ss += d * d;
  }
  const double rmse = std::sqrt(ss / static_cast<double>(a.size()));
  return range > 0.0 ? rmse / range : rmse;
}

}  // namespace mrk
