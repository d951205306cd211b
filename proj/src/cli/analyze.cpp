#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mrk/analysis/analysis.hpp"
#include "mrk/cli/commands.hpp"
#include "mrk/core/error.hpp"

namespace mrk::cli {
namespace {

using nlohmann::json;

// At most `per_class` rows of each class, drawn without replacement and kept
// in their original order.
analysis::FeatureSet subsample(const analysis::FeatureSet& fs, std::size_t per_class,
                               const RngStream& rng) {
  std::vector<std::vector<std::size_t>> by_class(fs.classes());
  for (std::size_t i = 0; i < fs.rows(); ++i) by_class[static_cast<std::size_t>(fs.labels[i])].push_back(i);
  bool needed = false;
  for (const auto& rows : by_class) needed |= rows.size() > per_class;
  if (!needed) return fs;

  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto rows = by_class[c];
    if (rows.size() > per_class) {
      RngStream s = rng.derive(static_cast<std::uint64_t>(c));
      for (std::size_t i = 0; i < per_class; ++i) {
        std::swap(rows[i], rows[i + s.below(rows.size() - i)]);
      }
      rows.resize(per_class);
    }
    keep.insert(keep.end(), rows.begin(), rows.end());
  }
  std::sort(keep.begin(), keep.end());

  analysis::FeatureSet out;
  out.weights = fs.weights;
  out.biases = fs.biases;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), fs.features.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = fs.features.row(static_cast<Eigen::Index>(keep[i]));
    out.labels.push_back(fs.labels[keep[i]]);
  }
  return out;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '{}'", path.string());
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int analyze_features(const AnalyzeOptions& options, std::ostream& out) {
  const auto full = analysis::feature_set_from_dump(analysis::read_tensor_dump(options.dump));
  const RngStream root(options.seed);
  const auto fs = subsample(full, options.per_class, root.derive("subsample"));
  const auto result = analysis::kvgm(fs, options.k, options.repeats, root.derive("k_variance"));

  out << fmt::format("rows: {} of {}\n", fs.rows(), full.rows());
  out << fmt::format("median margin: {}\n", metrics::format_number(result.median_margin));
  out << fmt::format("k-variance: {}\n", metrics::format_number(result.k_variance));
  out << fmt::format("kVGM: {}\n", metrics::format_number(result.value));
  if (result.undefined_margins > 0) {
    out << fmt::format("undefined margins: {}\n", result.undefined_margins);
  }

  if (options.out_dir) {
    fs::create_directories(*options.out_dir);
    const auto pca = analysis::pca_project(fs.features, options.components);
    auto csv = open_output(*options.out_dir / "pca.csv");
    csv << "label";
    for (int j = 0; j < options.components; ++j) csv << ",pc" << j + 1;
    csv << '\n';
    for (Eigen::Index i = 0; i < pca.projection.rows(); ++i) {
      csv << fs.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < pca.projection.cols(); ++j) {
        csv << ',' << metrics::format_number(pca.projection(i, j));
      }
      csv << '\n';
    }
    json ratios = json::array();
    for (double r : pca.explained_ratio) ratios.push_back(r);
    const json doc = {{"rows", fs.rows()},
                      {"k", options.k},
                      {"repeats", options.repeats},
                      {"seed", options.seed},
                      {"median_margin", number_or_null(result.median_margin)},
                      {"k_variance", result.k_variance},
                      {"kvgm", number_or_null(result.value)},
                      {"undefined_margins", result.undefined_margins},
                      {"explained_ratio", ratios}};
    open_output(*options.out_dir / "kvgm.json") << doc.dump(2) << '\n';
  }
  return 0;
}

int analyze_norms(const AnalyzeOptions& options, std::ostream& out) {
  const auto norms = analysis::weight_norms(analysis::read_tensor_dump(options.dump));
  std::string text = "depth,norm\n";
  for (const auto& [depth, norm] : norms) text += fmt::format("{},{}\n", depth, format_norm(norm));
  out << text;
  if (options.out_dir) {
    fs::create_directories(*options.out_dir);
    open_output(*options.out_dir / "norms.csv") << text;
  }
  return 0;
}

}  // namespace

std::string format_norm(double value) {
  std::string s = metrics::format_number(value);
  if (std::isfinite(value) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out) {
  if (options.mode == "features") return analyze_features(options, out);
  if (options.mode == "norms") return analyze_norms(options, out);
  fail(ErrorCode::InvalidArgument, "unknown analyze mode '{}' (features or norms)", options.mode);
}

}  // namespace mrk::cli
