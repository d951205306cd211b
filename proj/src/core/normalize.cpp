#include "mrk/core/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "mrk/core/error.hpp"
#include "mrk/core/stats.hpp"

namespace mrk {

Volume normalize_zscore(const Volume& volume) {
  std::vector<float> out(volume.data().size());
  const std::size_t n = volume.channel_size();
  for (std::size_t c = 0; c < volume.channels(); ++c) {
    const auto channel = volume.channel(c);
    const auto [mean, sd] = mean_std(channel);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      fail(ErrorCode::DegenerateInput, "channel {} has zero variance", c);
    }
    for (std::size_t i = 0; i < n; ++i) {
      out[c * n + i] = static_cast<float>((channel[i] - mean) / sd);
    }
  }
  return volume.with_data(std::move(out));
}

}  // namespace mrk
