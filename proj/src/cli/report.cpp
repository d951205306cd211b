#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "mrk/cli/commands.hpp"
#include "mrk/core/error.hpp"
#include "mrk/core/nifti.hpp"
#include "mrk/corruptions/transform_kind.hpp"

namespace mrk::cli {
namespace {

std::optional<fs::path> find_reference(const fs::path& dir, const std::string& case_id) {
  if (auto mask = find_mask(dir, case_id)) return mask;
  for (const char* ext : {".nii.gz", ".nii"}) {
    const fs::path p = dir / (case_id + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

LabelMask read_labels(const fs::path& path) { return *read_nifti(path, {.as_labels = true}).labels; }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double x : sorted) sum += x;
  return sum / static_cast<double>(sorted.size());
}

std::string direction(const metrics::PairedTestResult& t, double mean_a, double mean_b,
                      bool higher_is_better) {
  if (t.degenerate || !t.significant || mean_a == mean_b) return "ns";
  const bool b_higher = mean_b > mean_a;
  return b_higher == higher_is_better ? "improved" : "degraded";
}

}  // namespace

EvaluateReport cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  if (options.labels.empty()) fail(ErrorCode::InvalidArgument, "evaluate needs at least one label");
  EvaluateReport report;
  std::set<std::string> seen;
  for (const auto& pred_path : list_images(options.pred_dir, options.pattern)) {
    const std::string case_id = case_id_of(pred_path);
    seen.insert(case_id);
    const auto gt_path = find_reference(options.gt_dir, case_id);
    if (!gt_path) {
      report.errors.push_back(fmt::format("{}: no reference mask in '{}'", case_id,
                                          options.gt_dir.string()));
      continue;
    }
    try {
      const LabelMask pred = read_labels(pred_path);
      const LabelMask gt = read_labels(*gt_path);
      for (const auto& [name, id] : options.labels) {
        metrics::MetricsRecord r;
        r.case_id = case_id;
        r.structure = name;
        r.phase = metrics::phase_from_case_id(case_id);
        r.dsc = metrics::dsc(pred, gt, id);
        r.hd95 = metrics::hd95(pred, gt, id);
        report.records.push_back(std::move(r));
      }
    } catch (const std::exception& e) {
      report.errors.push_back(fmt::format("{}: {}", case_id, e.what()));
    }
  }
  // References without a prediction are errors too.
  for (const auto& gt_path : list_images(options.gt_dir, "*.nii*")) {
    const std::string id = case_id_of(gt_path);
    if (!seen.contains(id)) report.errors.push_back(fmt::format("{}: no prediction", id));
  }
  for (const auto& entry : fs::directory_iterator(options.gt_dir)) {
    const std::string id = case_id_of(entry.path());
    if (id.size() > 3 && id.ends_with("_gt") && !seen.contains(id.substr(0, id.size() - 3))) {
      report.errors.push_back(fmt::format("{}: no prediction", id.substr(0, id.size() - 3)));
    }
  }
  std::sort(report.errors.begin(), report.errors.end());
  report.errors.erase(std::unique(report.errors.begin(), report.errors.end()), report.errors.end());

  if (options.out) {
    if (options.out->has_parent_path()) fs::create_directories(options.out->parent_path());
    metrics::write_metrics_csv(*options.out, report.records, options.labels);
  } else {
    metrics::write_metrics_csv(out, report.records, options.labels);
  }
  return report;
}

std::vector<CompareRow> cmd_compare(const fs::path& csv_a, const fs::path& csv_b, std::ostream& out) {
  const auto a = metrics::read_metrics_csv(csv_a);
  const auto b = metrics::read_metrics_csv(csv_b);
  using Key = std::pair<std::string, std::string>;
  std::map<Key, const metrics::MetricsRecord*> ra;
  std::map<Key, const metrics::MetricsRecord*> rb;
  for (const auto& r : a.records) {
    if (!ra.emplace(Key{r.case_id, r.structure}, &r).second) {
      fail(ErrorCode::Format, "{}: duplicate row {}/{}", csv_a.string(), r.case_id, r.structure);
    }
  }
  for (const auto& r : b.records) {
    if (!rb.emplace(Key{r.case_id, r.structure}, &r).second) {
      fail(ErrorCode::Format, "{}: duplicate row {}/{}", csv_b.string(), r.case_id, r.structure);
    }
  }
  for (const auto& [key, _] : ra) {
    if (!rb.contains(key)) {
      fail(ErrorCode::InvalidArgument, "row {}/{} is missing from '{}'", key.first, key.second,
           csv_b.string());
    }
  }
  for (const auto& [key, _] : rb) {
    if (!ra.contains(key)) {
      fail(ErrorCode::InvalidArgument, "row {}/{} is missing from '{}'", key.first, key.second,
           csv_a.string());
    }
  }

  std::set<std::string> structures;
  for (const auto& [key, _] : ra) structures.insert(key.second);
  std::vector<std::string> groups(structures.begin(), structures.end());
  groups.push_back("all");

  std::vector<CompareRow> rows;
  for (const char* metric : {"dsc", "hd95"}) {
    const bool is_dsc = std::string_view(metric) == "dsc";
    for (const auto& group : groups) {
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& [key, rec_a] : ra) {
        if (group != "all" && key.second != group) continue;
        const auto* rec_b = rb.at(key);
        if (is_dsc) {
          x.push_back(rec_a->dsc);
          y.push_back(rec_b->dsc);
        } else if (rec_a->hd95 && rec_b->hd95) {
          x.push_back(*rec_a->hd95);
          y.push_back(*rec_b->hd95);
        }
      }
      CompareRow row;
      row.metric = metric;
      row.structure = group;
      row.mean_a = mean_of(x);
      row.mean_b = mean_of(y);
      if (x.size() >= 2) {
        // Differences are taken as b - a so the sign follows the direction.
        row.test = metrics::paired_t_test(y, x);
      } else {
        row.test.n = x.size();
        row.test.degenerate = true;
        row.test.p_value = 1.0;
      }
      row.direction = direction(row.test, row.mean_a, row.mean_b, is_dsc);
      rows.push_back(std::move(row));
    }
  }

  out << "metric,structure,n,mean_a,mean_b,mean_diff,t,p,significant,direction\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.structure << ',' << r.test.n << ','
        << metrics::format_number(r.mean_a) << ',' << metrics::format_number(r.mean_b) << ','
        << metrics::format_number(r.test.mean_diff) << ','
        << metrics::format_number(r.test.t_stat) << ',' << metrics::format_number(r.test.p_value)
        << ',' << (r.test.significant ? 1 : 0) << ',' << r.direction << '\n';
  }
  return rows;
}

TrendReport cmd_trend(const fs::path& root, const fs::path& out_dir) {
  if (!fs::is_directory(root)) fail(ErrorCode::Io, "'{}' is not a directory", root.string());
  TrendReport report;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) report.models.push_back(entry.path().filename().string());
  }
  std::sort(report.models.begin(), report.models.end());
  if (report.models.empty()) fail(ErrorCode::Io, "no model directories under '{}'", root.string());

  auto mean_dsc = [](const fs::path& csv) -> std::optional<std::string> {
    if (!fs::is_regular_file(csv)) return std::nullopt;
    const auto table = metrics::read_metrics_csv(csv);
    if (table.records.empty()) return std::nullopt;
    const auto rows = metrics::aggregate(table.records, metrics::GroupBy::None);
    return metrics::format_number(rows.back().dsc.mean);
  };

  fs::create_directories(out_dir);
  for (auto kind : corrupt::kAllTransforms) {
    const std::string name(corrupt::name(kind));
    bool present = false;
    for (const auto& model : report.models) present |= fs::is_directory(root / model / name);
    if (!present) continue;

    const fs::path file = out_dir / fmt::format("pgf_format_corruption_trends_{}.csv", name);
    std::ofstream out(file, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write '{}'", file.string());
    out << "Severity";
    for (const auto& model : report.models) out << ',' << model;
    out << '\n';
    for (int severity = 0; severity <= corrupt::kMaxSeverity; ++severity) {
      out << severity;
      for (const auto& model : report.models) {
        const fs::path csv = severity == 0
                                 ? root / model / "original" / "metrics.csv"
                                 : root / model / name / std::to_string(severity) / "metrics.csv";
        const auto cell = mean_dsc(csv);
        if (!cell) {
          ++report.warnings;
          std::cerr << "warning: missing " << csv.string() << '\n';
        }
        out << ',' << cell.value_or("");
      }
      out << '\n';
    }
    report.files.push_back(file);
  }
  return report;
}

}  // namespace mrk::cli
