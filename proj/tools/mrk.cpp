#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "mrk/analysis/analysis.hpp"
#include "mrk/cli/commands.hpp"
#include "mrk/core/error.hpp"

namespace {

using namespace mrk;
namespace fs = std::filesystem;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MRK_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
    std::cerr << "warning: ignoring non-numeric MRK_SEED '" << env << "'\n";
  }
  return 0;
}

int report_errors(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << '\n';
  return errors.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRI corruption benchmark and robustness toolkit"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  std::string in_dir, out_dir, transforms = "all", severities = "all", pattern = "*.nii*";
  std::uint64_t seed = default_seed();
  std::string config;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* corrupt = app.add_subcommand("corrupt", "Generate corrupted copies of a test set");
  corrupt->add_option("--in", in_dir, "Directory of NIfTI volumes")->required();
  corrupt->add_option("--out", out_dir, "Output root")->required();
  corrupt->add_option("--transforms", transforms, "'all' or comma list of transforms");
  corrupt->add_option("--severities", severities, "'all' or comma list of 1..5, ranges allowed");
  corrupt->add_option("--seed", seed, "Master seed (default $MRK_SEED or 0)");
  corrupt->add_option("--config", config, "Severity config JSON");
  corrupt->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  corrupt->add_option("--pattern", pattern, "Glob for input file names");

  std::string pred_dir, gt_dir, labels, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "DSC and HD95 of predictions against references");
  evaluate->add_option("--pred", pred_dir, "Prediction directory")->required();
  evaluate->add_option("--gt", gt_dir, "Reference directory")->required();
  evaluate->add_option("--labels", labels, "name=id list, e.g. LV=1,MYO=2,RV=3")->required();
  evaluate->add_option("--out", eval_out, "Output CSV (stdout when omitted)");
  evaluate->add_option("--pattern", pattern, "Glob for prediction file names");

  std::string csv_a, csv_b, compare_out;
  auto* compare = app.add_subcommand("compare", "Paired t-tests between two metrics CSVs");
  compare->add_option("--a", csv_a, "Baseline metrics CSV")->required();
  compare->add_option("--b", csv_b, "Candidate metrics CSV")->required();
  compare->add_option("--out", compare_out, "Output CSV (stdout when omitted)");

  std::string trend_root, trend_out;
  auto* trend = app.add_subcommand("trend", "Per-transform severity trend CSVs");
  trend->add_option("--root", trend_root, "<root>/<model>/<Transform>/<severity>/metrics.csv")->required();
  trend->add_option("--out", trend_out, "Output directory (default: root)");

  cli::AnalyzeOptions analyze_options;
  std::string analyze_out;
  auto* analyze = app.add_subcommand("analyze", "Feature-space and weight-norm analysis");
  analyze->add_option("--mode", analyze_options.mode, "features or norms")
      ->required()
      ->check(CLI::IsMember({"features", "norms"}));
  analyze->add_option("--dump", analyze_options.dump, "Tensor manifest JSON")->required();
  analyze->add_option("--out", analyze_out, "Output directory");
  analyze->add_option("--components", analyze_options.components, "PCA components")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--k", analyze_options.k, "Subset size for k-variance")
      ->check(CLI::Range(1, analysis::kMaxKVarianceSubset));
  analyze->add_option("--repeats", analyze_options.repeats, "k-variance repeats")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--per-class", analyze_options.per_class, "Rows sampled per class")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--seed", seed, "Sampling seed (default $MRK_SEED or 0)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corrupt) {
      cli::CorruptOptions o;
      o.in_dir = in_dir;
      o.out_dir = out_dir;
      o.transforms = cli::parse_transforms(transforms);
      o.severities = cli::parse_severities(severities);
      o.seed = seed;
      if (!config.empty()) o.config = config;
      o.jobs = jobs;
      o.pattern = pattern;
      const auto report = cli::cmd_corrupt(o);
      std::cout << fmt::format("{} volumes written, manifest {}\n", report.records.size(),
                               report.manifest.string());
      return report_errors(report.errors);
    }
    if (*evaluate) {
      cli::EvaluateOptions o;
      o.pred_dir = pred_dir;
      o.gt_dir = gt_dir;
      o.labels = metrics::parse_label_map(labels);
      if (!eval_out.empty()) o.out = eval_out;
      o.pattern = pattern;
      return report_errors(cli::cmd_evaluate(o, std::cout).errors);
    }
    if (*compare) {
      if (compare_out.empty()) {
        cli::cmd_compare(csv_a, csv_b, std::cout);
      } else {
        std::ofstream out(compare_out, std::ios::binary);
        if (!out) fail(ErrorCode::Io, "cannot write '{}'", compare_out);
        cli::cmd_compare(csv_a, csv_b, out);
      }
      return 0;
    }
    if (*trend) {
      const auto report = cli::cmd_trend(trend_root, trend_out.empty() ? trend_root : trend_out);
      for (const auto& f : report.files) std::cout << f.string() << '\n';
      if (report.warnings > 0) std::cerr << report.warnings << " missing cells\n";
      return 0;
    }
    if (*analyze) {
      analyze_options.seed = seed;
      if (!analyze_out.empty()) analyze_options.out_dir = analyze_out;
      return cli::cmd_analyze(analyze_options, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
