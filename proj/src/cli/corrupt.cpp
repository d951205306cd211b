#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/chrono.h>
#include <nlohmann/json.hpp>

#include "mrk/cli/commands.hpp"
#include "mrk/core/error.hpp"
#include "mrk/core/nifti.hpp"
#include "mrk/corruptions/corrupt.hpp"

namespace mrk::cli {
namespace {

using nlohmann::json;

// UTC creation time; SOURCE_DATE_EPOCH pins it for reproducible trees.
std::string creation_time() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

void write_manifest(const CorruptOptions& options, const corrupt::SeverityConfig& config,
                    const CorruptReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    json rec = {{"input", r.input},
                {"case_id", r.case_id},
                {"transform", r.transform},
                {"severity", r.severity},
                {"stream", r.stream},
                {"subseed", fmt::format("{:016x}", r.stream_key)},
                {"output", r.output}};
    if (!r.mask_output.empty()) rec["mask_output"] = r.mask_output;
    records.push_back(std::move(rec));
  }
  json transforms = json::array();
  for (auto k : options.transforms) transforms.push_back(std::string(corrupt::name(k)));
  const json doc = {
      {"tool", "mrk"},
      {"version", std::string(kVersion)},
      {"master_seed", options.seed},
      {"config_hash", fmt::format("{:016x}", config.hash())},
      {"config", config.to_json()},
      {"transforms", transforms},
      {"severities", options.severities},
      {"pattern", options.pattern},
      {"created", creation_time()},
      {"records", records},
      {"errors", report.errors},
  };
  std::ofstream out(report.manifest);
  if (!out) fail(ErrorCode::Io, "cannot write '{}'", report.manifest.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

CorruptReport cmd_corrupt(const CorruptOptions& options) {
  const corrupt::SeverityConfig config =
      options.config ? corrupt::SeverityConfig::load(*options.config)
                     : corrupt::SeverityConfig::defaults();
  for (auto kind : options.transforms) {
    for (int s : options.severities) (void)config.params(kind, s);
  }
  const auto inputs = list_images(options.in_dir, options.pattern);
  if (inputs.empty()) {
    fail(ErrorCode::Io, "no images matching '{}' in '{}'", options.pattern, options.in_dir.string());
  }
  fs::create_directories(options.out_dir);

  const std::size_t per_case = options.transforms.size() * options.severities.size();
  std::vector<CorruptRecord> records(inputs.size() * per_case);
  std::vector<char> done(records.size(), 0);
  std::vector<std::string> errors;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= inputs.size()) return;
      const fs::path& input = inputs[i];
      const std::string case_id = case_id_of(input);
      try {
        const Volume volume = read_nifti(input).volume;
        std::optional<LabelMask> mask;
        if (const auto mask_path = find_mask(options.in_dir, case_id)) {
          mask = read_nifti(*mask_path, {.as_labels = true}).labels;
        }
        std::size_t slot = i * per_case;
        for (auto kind : options.transforms) {
          for (int severity : options.severities) {
            const std::string name(corrupt::name(kind));
            const fs::path rel = fs::path(name) / std::to_string(severity);
            fs::create_directories(options.out_dir / rel);
            const RngStream rng = corrupt::corruption_stream(options.seed, case_id, kind, severity);
            const auto result = corrupt::apply_corruption(volume, mask ? &*mask : nullptr, kind,
                                                          severity, config, rng);
            CorruptRecord& rec = records[slot];
            rec.input = input.filename().string();
            rec.case_id = case_id;
            rec.transform = name;
            rec.severity = severity;
            rec.stream = rng.path_string();
            rec.stream_key = rng.key();
            rec.output = (rel / (case_id + ".nii.gz")).generic_string();
            write_nifti(result.volume, options.out_dir / rec.output);
            if (result.labels) {
              rec.mask_output = (rel / (case_id + "_gt.nii.gz")).generic_string();
              write_nifti(*result.labels, options.out_dir / rec.mask_output);
            }
            done[slot] = 1;
            ++slot;
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        errors.push_back(fmt::format("{}: {}", input.filename().string(), e.what()));
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(inputs.size())));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  CorruptReport report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (done[i]) report.records.push_back(std::move(records[i]));
  }
  std::sort(errors.begin(), errors.end());
  report.errors = std::move(errors);
  report.manifest = options.out_dir / "manifest.json";
  write_manifest(options, config, report);
  return report;
}

}  // namespace mrk::cli
