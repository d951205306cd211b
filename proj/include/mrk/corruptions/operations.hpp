#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mrk/core/rng.hpp"
#include "mrk/core/volume.hpp"
#include "mrk/corruptions/warp.hpp"

namespace mrk::corrupt {

/// Axis along which k-space lines are acquired sequentially (y by default).
inline constexpr int kPhaseAxis = 1;

enum class NoiseScale {
  RelativeToRange,  // sigma is a fraction of each channel's p1-p99 range
  Absolute,
};

/// out = sqrt((x + n1)^2 + n2^2) with n1, n2 ~ N(0, sigma). Noise is drawn
/// independently per channel. sigma == 0 returns the input unchanged.
Volume rician_noise(const Volume& volume, double sigma, RngStream rng,
                    NoiseScale scale = NoiseScale::RelativeToRange);

// ---- intensity ---------------------------------------------------------

/// Polynomial of total degree <= order over coordinates normalized to
/// [-1, 1] per axis.
struct BiasPolynomial {
  struct Term {
    int px, py, pz;
    double coefficient;
  };
  std::vector<Term> terms;

  double evaluate(double u, double v, double w) const;
};

BiasPolynomial draw_bias_polynomial(int order, double magnitude, RngStream rng);

/// x * exp(P(u)), shared by all channels.
Volume apply_bias_field(const Volume& volume, const BiasPolynomial& poly);
Volume bias_field(const Volume& volume, double magnitude, int order, RngStream rng);

/// Normalized coordinate of index i on an axis of length n ([-1, 1]; 0 when n == 1).
double normalized_coordinate(std::size_t i, std::size_t n);

/// Voxels within the channel's 1st-99th percentile window are mapped through
/// u^gamma on the normalized window; voxels outside it pass through
/// unchanged. Throws DegenerateInput when p1 == p99.
Volume gamma_map(const Volume& volume, double gamma);

/// Separable Gaussian blur, sigma given in mm, kernel truncated at 4 sigma,
/// edges replicated.
Volume gaussian_smooth(const Volume& volume, double sigma_mm);

enum class IntensityMode { GammaCompress, GammaExpand, Smooth };
Volume intensity_map(const Volume& volume, IntensityMode mode, double param);

// ---- geometry ----------------------------------------------------------

enum class GeometricMode { IsoDownsample, AnisoDownsample, Rotate, Scale };

/// Result of a geometric transform; `labels` is set when a mask was supplied
/// and the transform moves anatomy (rotate / scale / elastic).
struct GeometricResult {
  Volume volume;
  std::optional<LabelMask> labels;
};

/// Downsampling is in-plane; rotation and zoom are about the slice centre
/// with out-of-field voxels set to the channel minimum. The rotation sign,
/// zoom direction and anisotropic axis are drawn from `rng`.
GeometricResult resample_geometric(const Volume& volume, GeometricMode mode, double param,
                                   RngStream rng, const LabelMask* labels = nullptr);

GeometricResult elastic_deform(const Volume& volume, double max_displacement_mm,
                               int control_points, RngStream rng,
                               const LabelMask* labels = nullptr);

// ---- k-space -----------------------------------------------------------

/// Scales phase-encode lines whose signed frequency is a nonzero multiple of
/// `num_ghosts` by (1 - intensity), slice by slice.
Volume ghosting(const Volume& volume, int num_ghosts, double intensity, int axis = kPhaseAxis);

/// In-plane frequency coordinate (signed).
struct FrequencyCoordinate {
  long kx = 0;
  long ky = 0;
  friend bool operator==(const FrequencyCoordinate&, const FrequencyCoordinate&) = default;
};

/// Adds `value` at (kx, ky) and at its Hermitian mirror in every slice of
/// every channel (once when the coordinate is its own mirror).
Volume add_kspace_spike(const Volume& volume, FrequencyCoordinate k, double value);

/// Draws `num_spikes` coordinates with normalized radius in
/// [band_low, band_high] of Nyquist and adds amplitude * max|X| of each
/// slice there.
Volume spike_noise(const Volume& volume, int num_spikes, double amplitude, RngStream rng,
                   double band_low = 0.1, double band_high = 0.6);

/// Keeps the ceil(keep_fraction * n) phase lines nearest DC, zeroes the rest.
Volume kspace_subsample(const Volume& volume, double keep_fraction, int axis = kPhaseAxis);

struct RigidMotion {
  double degrees = 0.0;
  double tx_mm = 0.0;
  double ty_mm = 0.0;
};

/// Copy 0 is the unmoved volume and copy m (1..M) applies moves[m-1].
/// Centered phase lines [breakpoints[m-1], breakpoints[m]) are taken from
/// copy m, with implicit bounds 0 and n. Breakpoints must be sorted.
struct MotionPlan {
  std::vector<RigidMotion> moves;
  std::vector<std::size_t> breakpoints;
};

MotionPlan draw_motion_plan(std::size_t phase_lines, int num_movements, double max_rotation_deg,
                            double max_translation_mm, RngStream rng);

Volume apply_motion(const Volume& volume, const MotionPlan& plan, int axis = kPhaseAxis);

Volume random_motion(const Volume& volume, int num_movements, double max_rotation_deg,
                     double max_translation_mm, RngStream rng);

}  // namespace mrk::corrupt
