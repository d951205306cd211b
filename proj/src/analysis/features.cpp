#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrk/analysis/analysis.hpp"
#include "mrk/core/error.hpp"

namespace mrk::analysis {

void FeatureSet::validate() const {
  const auto n = features.rows();
  const auto d = features.cols();
  const auto c = weights.rows();
  if (n == 0 || d == 0) fail(ErrorCode::Validation, "feature matrix is empty");
  if (c < 2) fail(ErrorCode::Validation, "classifier needs at least 2 classes, got {}", c);
  if (weights.cols() != d) {
    fail(ErrorCode::Validation, "weights have {} columns, features {}", weights.cols(), d);
  }
  if (biases.size() != c) fail(ErrorCode::Validation, "{} biases for {} classes", biases.size(), c);
  if (labels.size() != static_cast<std::size_t>(n)) {
    fail(ErrorCode::Validation, "{} labels for {} feature rows", labels.size(), n);
  }
  if (n < 2 * c) fail(ErrorCode::Validation, "need at least {} rows for {} classes, got {}", 2 * c, c, n);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= c) {
      fail(ErrorCode::Validation, "label {} at row {} is outside [0, {})", labels[i], i, c);
    }
  }
  if (!features.allFinite() || !weights.allFinite() || !biases.allFinite()) {
    fail(ErrorCode::Validation, "feature set contains non-finite values");
  }
}

PcaResult pca_project(const Eigen::MatrixXd& features, int k) {
  const auto n = features.rows();
  const auto d = features.cols();
  if (n < 2) fail(ErrorCode::InvalidArgument, "PCA needs at least 2 rows, got {}", n);
  if (k < 1 || k > d) fail(ErrorCode::InvalidArgument, "PCA needs 1 <= k <= D ({}), got {}", d, k);
  if (!features.allFinite()) fail(ErrorCode::Validation, "PCA input contains non-finite values");

  const Eigen::RowVectorXd mean = features.colwise().mean();
  const Eigen::MatrixXd centered = features.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorCode::DegenerateInput, "covariance eigensolver failed");

  const Eigen::VectorXd values = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  const double total = std::max(0.0, values.sum());
  const double tol = std::max(1e-12, 1e-12 * std::abs(values(0)));

  PcaResult out;
  out.components = Eigen::MatrixXd::Zero(d, k);
  int padded = 0;
  for (int j = 0; j < k; ++j) {
    const double lambda = values(j);
    if (!(lambda > tol)) {
      ++padded;
      out.explained_ratio.push_back(0.0);
      continue;
    }
    Eigen::VectorXd v = vectors.col(j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.components.col(j) = v;
    out.explained_ratio.push_back(total > 0.0 ? lambda / total : 0.0);
  }
  if (padded > 0) {
    log_warning(fmt::format("PCA: data rank is below {}; {} zero component(s) padded", k, padded));
  }
  out.projection = centered * out.components;
  return out;
}

std::vector<double> gradient_normalized_margins(const FeatureSet& fs) {
  fs.validate();
  const Eigen::MatrixXd logits =
      (fs.features * fs.weights.transpose()).rowwise() + fs.biases.transpose();
  std::vector<double> out(fs.rows());
  for (std::size_t i = 0; i < fs.rows(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto y = static_cast<Eigen::Index>(fs.labels[i]);
    Eigen::Index r = -1;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (c == y) continue;
      if (r < 0 || logits(row, c) > logits(row, r)) r = c;
    }
    const double norm = (fs.weights.row(y) - fs.weights.row(r)).norm();
    out[i] = norm > 0.0 ? (logits(row, y) - logits(row, r)) / norm
                        : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) {
    fail(ErrorCode::InvalidArgument, "assignment needs a square cost matrix, got {}x{}", cost.rows(),
         cost.cols());
  }
  if (!cost.allFinite()) fail(ErrorCode::InvalidArgument, "assignment costs must be finite");
  // Shortest augmenting path with row/column potentials; 1-based internally.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // match[col] = row
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> out(n);
  for (std::size_t j = 1; j <= n; ++j) out[match[j] - 1] = j - 1;
  return out;
}

double wasserstein1(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0) {
    fail(ErrorCode::InvalidArgument, "point clouds must be nonempty and equal-shaped ({}x{} vs {}x{})",
         a.rows(), a.cols(), b.rows(), b.cols());
  }
  const auto n = a.rows();
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (a.row(i) - b.row(j)).norm();
  }
  const auto match = min_cost_assignment(cost);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += cost(i, static_cast<Eigen::Index>(match[static_cast<std::size_t>(i)]));
  }
  return sum / static_cast<double>(n);
}

double k_variance(const FeatureSet& fs, int k, int repeats, const RngStream& rng) {
  fs.validate();
  if (k < 1 || k > kMaxKVarianceSubset) {
    fail(ErrorCode::InvalidArgument, "k must be in [1, {}], got {}", kMaxKVarianceSubset, k);
  }
  if (repeats < 1) fail(ErrorCode::InvalidArgument, "repeats must be >= 1, got {}", repeats);
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::vector<Eigen::Index>> members(fs.classes());
  for (std::size_t i = 0; i < fs.rows(); ++i) {
    members[static_cast<std::size_t>(fs.labels[i])].push_back(static_cast<Eigen::Index>(i));
  }
  double total = 0.0;
  std::size_t terms = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() < 2 * kk) {
      fail(ErrorCode::InvalidArgument, "class {} has {} rows, k-variance needs {}", c,
           members[c].size(), 2 * kk);
    }
    for (int r = 0; r < repeats; ++r) {
      RngStream s = rng.derive(static_cast<std::uint64_t>(c)).derive(static_cast<std::uint64_t>(r));
      std::vector<Eigen::Index> idx = members[c];
      for (std::size_t i = 0; i < 2 * kk; ++i) {
        const std::size_t j = i + s.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
      Eigen::MatrixXd a(k, fs.features.cols());
      Eigen::MatrixXd b(k, fs.features.cols());
      for (std::size_t i = 0; i < kk; ++i) {
        a.row(static_cast<Eigen::Index>(i)) = fs.features.row(idx[i]);
        b.row(static_cast<Eigen::Index>(i)) = fs.features.row(idx[kk + i]);
      }
      total += wasserstein1(a, b);
      ++terms;
    }
  }
  return total / static_cast<double>(terms);
}

KvgmResult kvgm(const FeatureSet& fs, int k, int repeats, const RngStream& rng) {
  KvgmResult out;
  std::vector<double> margins;
  for (double m : gradient_normalized_margins(fs)) {
    if (std::isnan(m)) {
      ++out.undefined_margins;
    } else {
      margins.push_back(m);
    }
  }
  if (margins.empty()) fail(ErrorCode::DegenerateInput, "every margin is undefined");
  const std::size_t mid = margins.size() / 2;
  std::nth_element(margins.begin(), margins.begin() + static_cast<std::ptrdiff_t>(mid), margins.end());
  double median = margins[mid];
  if (margins.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(margins.begin(),
                                                margins.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  out.median_margin = median;
  out.k_variance = k_variance(fs, k, repeats, rng);
  if (out.k_variance == 0.0) {
    log_warning("kVGM: k-variance is 0; reporting infinity");
    out.value = std::numeric_limits<double>::infinity();
  } else {
    out.value = out.median_margin / out.k_variance;
  }
  return out;
}

}  // namespace mrk::analysis
