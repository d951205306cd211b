#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mrk/core/rng.hpp"
#include "mrk/core/volume.hpp"
#include "mrk/corruptions/operations.hpp"

namespace mrk::augment {

struct MixupParams {
  double beta_alpha = 0.2;  // lambda ~ Beta(alpha, alpha)
};

struct MixResult {
  Sample sample;
  double lambda = 1.0;
};

/// Throws GridMismatch unless both samples share grid, channel and class counts.
void check_compatible(const Sample& a, const Sample& b);

/// lambda * a + (1 - lambda) * b for image and mask.
Sample mixup_with_lambda(const Sample& a, const Sample& b, double lambda);
MixResult mixup(const Sample& a, const Sample& b, const MixupParams& params, RngStream rng);

/// Half-open voxel box [lo, hi) per axis.
struct Box {
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};

  std::size_t voxels() const noexcept {
    return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
  }
  bool contains(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x >= lo[0] && x < hi[0] && y >= lo[1] && y < hi[1] && z >= lo[2] && z < hi[2];
  }
};

struct CutMixResult {
  Sample sample;
  double lambda = 1.0;
  Box box;
};

/// Image and mask from `b` inside the box, from `a` elsewhere.
Sample cutmix_with_box(const Sample& a, const Sample& b, const Box& box);

/// Box whose side along each non-singleton axis is round(n * (1 - lambda)^(1/D)),
/// placed uniformly at random.
Box draw_cutmix_box(const Dims& dims, double lambda, RngStream& rng);

CutMixResult cutmix(const Sample& a, const Sample& b, const MixupParams& params, RngStream rng);

/// In-batch pairing: element i is mixed with element B-1-i, each pair using
/// the substream rng / i.
std::vector<MixResult> mixup_batch(const std::vector<Sample>& batch, const MixupParams& params,
                                   RngStream rng);
std::vector<CutMixResult> cutmix_batch(const std::vector<Sample>& batch, const MixupParams& params,
                                       RngStream rng);

struct AfaParams {
  double mu = 0.05;  // mean of the Exp law for the wave amplitude
  int coords_per_sample = 1;
  bool sign_symmetric = true;
  /// When set, amplitudes are multiples of each channel's p1-p99 range.
  bool relative_to_range = true;
};

/// Adds alpha * N at frequency k and at its Hermitian mirror of every slice
/// of every channel (N = nx * ny), i.e. a planar cosine of amplitude 2 * alpha
/// (alpha when k is its own mirror).
Volume afa_augment_at(const Volume& volume, corrupt::FrequencyCoordinate k, double alpha);

/// Per channel and slice: draws coords_per_sample non-DC frequencies and
/// amplitudes alpha ~ Exp(mu) (optionally sign-flipped) and adds them as in
/// afa_augment_at.
Volume afa_augment(const Volume& volume, const AfaParams& params, RngStream rng);

struct AugmentedPair {
  Sample clean;
  Sample afa;  // same mask as clean
};

AugmentedPair make_afa_pair(const Sample& sample, const AfaParams& params, RngStream rng);

/// Probabilities and ranges of the base augmentation set.
struct AugmentConfig {
  struct Rotation {
    double p = 0.2;
    double max_degrees = 30.0;
  } rotation;
  struct Scaling {
    double p = 0.2;
    double min_zoom = 0.7;
    double max_zoom = 1.4;
  } scaling;
  struct Noise {
    double p = 0.1;
    double max_variance = 0.1;  // relative to the channel variance
  } noise;
  struct Blur {
    double p = 0.2;
    double min_sigma = 0.5;  // voxels
    double max_sigma = 1.0;
  } blur;
  struct Brightness {
    double p = 0.15;
    double min_factor = 0.75;
    double max_factor = 1.25;
  } brightness;
  struct Contrast {
    double p = 0.15;
    double min_factor = 0.75;
    double max_factor = 1.25;
  } contrast;
  struct LowResolution {
    double p = 0.25;
    double min_zoom = 0.5;
    double max_zoom = 1.0;
  } low_resolution;
  struct Gamma {
    double p = 0.3;
    double min_gamma = 0.7;
    double max_gamma = 1.5;
  } gamma;
  struct Mirror {
    std::array<double, 3> p{0.5, 0.5, 0.0};
  } mirror;

  static AugmentConfig disabled();
  static AugmentConfig from_json(const nlohmann::json& doc);
  static AugmentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Mirror of image and mask along one axis, by index permutation.
Sample mirror(const Sample& sample, int axis);

/// Applies each base augmentation independently with its probability.
/// Rotation, scaling and mirroring move the image and the probability planes
/// together; the intensity augmentations leave the mask untouched.
Sample base_augment(const Sample& sample, const AugmentConfig& config, RngStream rng);

/// seed / sample id / operation name.
RngStream augment_stream(std::uint64_t seed, std::string_view sample_id, std::string_view op);

}  // namespace mrk::augment
