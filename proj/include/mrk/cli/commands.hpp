#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrk/corruptions/transform_kind.hpp"
#include "mrk/metrics/csv.hpp"

namespace mrk::cli {

namespace fs = std::filesystem;

inline constexpr std::string_view kVersion = "0.3.0";

/// Case id of an image path: file name without .nii / .nii.gz.
std::string case_id_of(const fs::path& path);

/// Images in `dir` whose names match `pattern` (fnmatch syntax), excluding
/// "<id>_gt" masks, sorted by name.
std::vector<fs::path> list_images(const fs::path& dir, const std::string& pattern = "*.nii*");

/// "<dir>/<id>_gt.nii.gz" or ".nii" when present.
std::optional<fs::path> find_mask(const fs::path& dir, const std::string& case_id);

/// Parses "all" or a comma list of snake_case / CamelCase transform names.
std::vector<corrupt::TransformKind> parse_transforms(const std::string& text);
/// Parses "all" or a comma list of 1..5 (ranges like 2-4 allowed).
std::vector<int> parse_severities(const std::string& text);

struct CorruptOptions {
  fs::path in_dir;
  fs::path out_dir;
  std::vector<corrupt::TransformKind> transforms;
  std::vector<int> severities;
  std::uint64_t seed = 0;
  std::optional<fs::path> config;
  unsigned jobs = 1;
  std::string pattern = "*.nii*";
};

struct CorruptRecord {
  std::string input;
  std::string case_id;
  std::string transform;
  int severity = 0;
  std::string stream;  // substream path
  std::uint64_t stream_key = 0;
  std::string output;
  std::string mask_output;  // empty unless a transformed mask was written
};

struct CorruptReport {
  std::vector<CorruptRecord> records;
  std::vector<std::string> errors;
  fs::path manifest;
};

/// Writes <out>/<Transform>/<severity>/<id>.nii.gz (plus <id>_gt.nii.gz for
/// transforms that move anatomy when a mask exists) and <out>/manifest.json.
CorruptReport cmd_corrupt(const CorruptOptions& options);

struct EvaluateOptions {
  fs::path pred_dir;
  fs::path gt_dir;
  metrics::LabelMap labels;
  std::optional<fs::path> out;  // stdout when unset
  std::string pattern = "*.nii*";
};

struct EvaluateReport {
  std::vector<metrics::MetricsRecord> records;
  std::vector<std::string> errors;
};

EvaluateReport cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

struct CompareRow {
  std::string metric;     // dsc or hd95
  std::string structure;  // label name or "all"
  metrics::PairedTestResult test;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::string direction;  // improved / degraded / ns, for b relative to a
};

/// Paired tests of b against a per structure and over all rows. Throws
/// InvalidArgument when the (case, structure) row sets differ.
std::vector<CompareRow> cmd_compare(const fs::path& csv_a, const fs::path& csv_b, std::ostream& out);

struct TrendReport {
  std::vector<fs::path> files;
  std::vector<std::string> models;
  std::size_t warnings = 0;  // missing cells
};

/// Reads <root>/<model>/original/metrics.csv and
/// <root>/<model>/<Transform>/<severity>/metrics.csv and writes
/// <out>/pgf_format_corruption_trends_<Transform>.csv.
TrendReport cmd_trend(const fs::path& root, const fs::path& out_dir);

struct AnalyzeOptions {
  std::string mode;  // features or norms
  fs::path dump;
  std::optional<fs::path> out_dir;
  int components = 2;
  int k = 32;
  int repeats = 10;
  std::size_t per_class = 2000;
  std::uint64_t seed = 0;
};

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out);

/// Numbers in norms reports: %.6g, with ".0" appended to integral values.
std::string format_norm(double value);

}  // namespace mrk::cli
