#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mrk {

/// Counter-based random stream keyed by (master seed, path of tokens).
///
/// A child stream is derived by hashing a token into the parent's key, so the
/// draws a subject/transform/severity sees never depend on how many other
/// streams were consumed before it. Copying a stream copies its position;
/// operations take streams by value and are therefore pure.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed);

  RngStream derive(std::string_view token) const;
  RngStream derive(std::uint64_t token) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t key() const noexcept { return key_; }
  const std::vector<std::string>& path() const noexcept { return path_; }
  /// "a/b/3" style rendering of the path, for manifests.
  std::string path_string() const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p);
  double normal();
  /// Exponential with the given mean.
  double exponential(double mean);
  double gamma(double shape);
  double beta(double a, double b);

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t key, std::vector<std::string> path);

  std::uint64_t master_seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::vector<std::string> path_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace mrk
