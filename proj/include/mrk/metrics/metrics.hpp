#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrk/core/volume.hpp"

namespace mrk::metrics {

/// 2|P n G| / (|P| + |G|) for one label. Both empty gives 1, exactly one
/// empty gives 0.
double dsc(const LabelMask& pred, const LabelMask& gt, std::uint32_t structure);

/// Voxels of the structure with at least one 6-neighbour outside it
/// (positions off the grid count as outside).
std::vector<std::size_t> boundary_voxels(const LabelMask& mask, std::uint32_t structure);

/// Symmetric 95th-percentile boundary distance in mm. nullopt when either
/// mask lacks the structure.
std::optional<double> hd95(const LabelMask& pred, const LabelMask& gt, std::uint32_t structure);

/// Squared Euclidean distance (mm^2) from every voxel to the nearest voxel
/// with `feature[i] != 0`; infinity when there is none.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature,
                                               const Grid& grid);

struct PairedTestResult {
  std::size_t n = 0;
  double mean_diff = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p < 0.05
  bool degenerate = false;   // every difference was zero
};

/// Two-sided paired t-test on x - y.
PairedTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

struct MetricsRecord {
  std::string case_id;
  std::string structure;  // label name
  std::string phase;      // "ED", "ES" or empty
  double dsc = 0.0;
  std::optional<double> hd95;
};

enum class GroupBy { None, Structure, Phase };

struct Stat {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> std;  // sample std, unset when n < 2
};

struct SummaryRow {
  std::string group;  // "all" for the overall row
  Stat dsc;
  Stat hd95;
  std::size_t excluded = 0;  // records with undefined HD95
};

/// One row per group (sorted by name) followed by the overall row. Throws
/// InvalidArgument on empty input.
std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records, GroupBy group_by);

/// "ED"/"ES" when the case id contains that token (separated by '_' or at an
/// end), else empty.
std::string phase_from_case_id(const std::string& case_id);

}  // namespace mrk::metrics
