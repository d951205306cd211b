#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mrk/metrics/metrics.hpp"

namespace mrk::metrics {

inline constexpr std::string_view kMetricsHeader = "case_id,structure,phase,dsc,hd95,excluded";

/// Label name / id pairs, e.g. {"LV", 1}.
using LabelMap = std::vector<std::pair<std::string, std::uint32_t>>;

/// Parses "LV=1,MYO=2,RV=3".
LabelMap parse_label_map(const std::string& text);

/// %.6g rendering used for every number in the metrics files.
std::string format_number(double value);

/// "# labels: ..." line, header, rows sorted by (case_id, structure), then one
/// "# summary,..." line per aggregate row grouped by structure. Summaries
/// are computed from the values as written, so re-aggregating the file
/// reproduces them exactly.
void write_metrics_csv(std::ostream& out, std::vector<MetricsRecord> records,
                       const LabelMap& labels);
void write_metrics_csv(const std::filesystem::path& path, std::vector<MetricsRecord> records,
                       const LabelMap& labels);

struct MetricsTable {
  std::vector<MetricsRecord> records;
  LabelMap labels;
};

/// Reads a metrics CSV; comment lines are skipped apart from "# labels:".
MetricsTable read_metrics_csv(std::istream& in, const std::string& source = "<stream>");
MetricsTable read_metrics_csv(const std::filesystem::path& path);

}  // namespace mrk::metrics
