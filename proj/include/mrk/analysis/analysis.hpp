#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrk/core/rng.hpp"

namespace mrk::analysis {

/// Rows are per-voxel final-layer features with their true class and the
/// linear classifier applied to them.
struct FeatureSet {
  Eigen::MatrixXd features;  // N x D
  std::vector<int> labels;   // N, each in [0, C)
  Eigen::MatrixXd weights;   // C x D
  Eigen::VectorXd biases;    // C

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t classes() const { return static_cast<std::size_t>(weights.rows()); }
  /// Throws Validation on inconsistent shapes, labels out of range,
  /// non-finite entries or N < 2C.
  void validate() const;
};

struct PcaResult {
  Eigen::MatrixXd projection;          // N x k
  Eigen::MatrixXd components;          // D x k, unit columns
  std::vector<double> explained_ratio; // k
};

/// Components by descending eigenvalue of the covariance; each component's
/// largest-magnitude entry is made positive. Rank-deficient data gets zero
/// components past the rank, with a warning.
PcaResult pca_project(const Eigen::MatrixXd& features, int k = 2);

/// (l_y - l_r) / ||w_y - w_r|| with r the best competing class. NaN when
/// w_y == w_r.
std::vector<double> gradient_normalized_margins(const FeatureSet& fs);

/// Minimum-cost perfect matching on a square cost matrix (Hungarian
/// algorithm). Returns the column assigned to each row.
std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Exact 1-Wasserstein distance between two equal-size uniform point clouds
/// (rows) under the Euclidean metric.
double wasserstein1(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

inline constexpr int kMaxKVarianceSubset = 64;

/// Mean over classes and repeats of W1 between two disjoint random k-subsets
/// of the class. Class c, repeat r uses the substream rng / c / r.
double k_variance(const FeatureSet& fs, int k, int repeats, const RngStream& rng);

struct KvgmResult {
  double value = 0.0;  // +inf when k_variance is 0
  double median_margin = 0.0;
  double k_variance = 0.0;
  std::size_t undefined_margins = 0;
};

/// median(margins) / k_variance.
KvgmResult kvgm(const FeatureSet& fs, int k, int repeats, const RngStream& rng);

struct Tensor {
  std::string name;
  int depth = 0;
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

using TensorDump = std::vector<Tensor>;

/// Manifest JSON {"version":1,"dtype":"f32","blob":<file>,"tensors":[{name,
/// shape, depth, offset}]} next to a raw little-endian float32 blob.
TensorDump read_tensor_dump(const std::filesystem::path& manifest);
void write_tensor_dump(const TensorDump& dump, const std::filesystem::path& manifest,
                       const std::string& blob_name);

/// Frobenius norm per depth (root-sum-square over tensors of equal depth),
/// ordered by depth.
std::vector<std::pair<int, double>> weight_norms(const TensorDump& dump);

/// Builds a FeatureSet from tensors named features [N,D], labels [N],
/// weights [C,D] and biases [C].
FeatureSet feature_set_from_dump(const TensorDump& dump);

}  // namespace mrk::analysis
