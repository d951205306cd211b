// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mrk/analysis/analysis.hpp"
#include "mrk/augment/augment.hpp"
#include "mrk/cli/commands.hpp"
#include "mrk/core/nifti.hpp"
#include "mrk/core/stats.hpp"
#include "mrk/corruptions/corrupt.hpp"
#include "mrk/metrics/csv.hpp"
#include "mrk/metrics/metrics.hpp"
#include "mrk/spectral/fft.hpp"
#include "support/dataset.hpp"
#include "support/oracles.hpp"
#include "support/t_oracle.hpp"
#include "support/zero_params.hpp"

using namespace mrk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<float> random_values(std::size_t n, RngStream& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

Outcome fft_oracle() {
  RngStream rng(101);
  double worst_dft = 0.0, worst_round = 0.0, worst_parseval = 0.0;
  for (std::size_t n = 8; n <= 96; n += 8) {
    for (std::size_t m : {n, n - 3}) {
      const Grid g = Grid::with_spacing({n, m, 1}, {1, 1, 1});
      const Volume v(g, 1, random_values(n * m, rng));
      const auto k = spectral::fft_forward(v);
      std::vector<test::cd> in(v.data().begin(), v.data().end());
      const auto ref = test::naive_dft2(in, n, m);
      std::vector<test::cd> got(k.data().begin(), k.data().end());
      worst_dft = std::max(worst_dft, test::max_abs_diff(got, ref) / test::max_abs(ref));

      const auto back = spectral::fft_inverse(k).volume;
      double peak = 0.0, diff = 0.0, energy = 0.0, spectrum = 0.0;
      for (std::size_t i = 0; i < n * m; ++i) {
        peak = std::max(peak, std::abs(static_cast<double>(v.data()[i])));
        diff = std::max(diff, std::abs(static_cast<double>(back.data()[i]) - v.data()[i]));
        energy += static_cast<double>(v.data()[i]) * v.data()[i];
        spectrum += std::norm(got[i]);
      }
      worst_round = std::max(worst_round, diff / peak);
      worst_parseval = std::max(worst_parseval, std::abs(spectrum / static_cast<double>(n * m) - energy) / energy);
    }
  }
  return {worst_dft <= 1e-5 && worst_round <= 1e-5 && worst_parseval <= 1e-4,
          fmt::format("dft rel {:.2e}, round trip rel {:.2e}, parseval rel {:.2e}", worst_dft, worst_round,
                      worst_parseval)};
}

Outcome afa_oracle() {
  const auto t0 = Clock::now();
  const std::size_t nx = 32, ny = 24;
  const auto ph = test::cardiac_phantom(nx, ny, 3);
  double worst = 0.0, worst_mean = 0.0;
  for (const auto k : {corrupt::FrequencyCoordinate{1, 0}, {3, -2}, {-5, 7}, {16, 0}, {0, 12}}) {
    const double alpha = 0.2;
    const Volume out = augment::afa_augment_at(ph.image, k, alpha);
    std::vector<test::cd> spec(nx * ny, 0.0);
    const std::size_t i = spectral::frequency_index(k.kx, nx) + nx * spectral::frequency_index(k.ky, ny);
    const std::size_t j = spectral::mirror_index(i % nx, nx) + nx * spectral::mirror_index(i / nx, ny);
    spec[i] += alpha * static_cast<double>(nx * ny);
    if (j != i) spec[j] += alpha * static_cast<double>(nx * ny);
    const auto wave = test::naive_dft2(spec, nx, ny, true);
    for (std::size_t z = 0; z < 3; ++z) {
      double before = 0.0, after = 0.0;
      for (std::size_t p = 0; p < nx * ny; ++p) {
        const double expect = ph.image.data()[z * nx * ny + p] + wave[p].real();
        worst = std::max(worst, std::abs(out.data()[z * nx * ny + p] - expect));
        before += ph.image.data()[z * nx * ny + p];
        after += out.data()[z * nx * ny + p];
      }
      worst_mean = std::max(worst_mean, std::abs(after - before) / static_cast<double>(nx * ny));
    }
  }
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Volume out = augment::afa_augment(ph.image, {}, RngStream(s));
    double before = 0.0, after = 0.0;
    for (std::size_t p = 0; p < out.data().size(); ++p) {
      before += ph.image.data()[p];
      after += out.data()[p];
    }
    worst_mean = std::max(worst_mean, std::abs(after - before) / static_cast<double>(out.data().size()));
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-5 && worst_mean <= 1e-5 && dt < 10.0,
          fmt::format("wave max err {:.2e}, mean shift {:.2e}, {:.2f} s", worst, worst_mean, dt)};
}

Outcome mixing_identities() {
  RngStream rng(7);
  const Grid g = Grid::with_spacing({12, 10, 3}, {1, 1, 1});
  auto sample = [&] {
    std::vector<std::uint32_t> labels(g.voxels());
    for (auto& l : labels) l = static_cast<std::uint32_t>(rng.below(4));
    return Sample{Volume(g, 1, random_values(g.voxels(), rng)), one_hot(LabelMask(g, labels, 4))};
  };
  const auto a = sample(), b = sample();
  const Dims d = g.dims;
  bool endpoints = augment::mixup_with_lambda(a, b, 1.0) == a && augment::mixup_with_lambda(a, b, 0.0) == b &&
                   augment::cutmix_with_box(a, b, augment::Box{}) == a &&
                   augment::cutmix_with_box(a, b, augment::Box{{0, 0, 0}, {d.nx, d.ny, d.nz}}) == b;

  double worst = 0.0;
  auto track = [&](const ProbMask& p) {
    for (std::size_t i = 0; i < g.voxels(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < p.num_classes(); ++c) s += p.plane(c)[i];
      worst = std::max(worst, std::abs(s - 1.0));
    }
  };
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto x = sample(), y = sample();
    track(augment::mixup(x, y, {}, RngStream(i)).sample.mask);
    track(augment::cutmix(x, y, {}, RngStream(i)).sample.mask);
  }
  return {endpoints && worst <= 1e-6,
          fmt::format("endpoints {}, worst |sum-1| {:.2e} over 1000 draws", endpoints ? "exact" : "differ", worst)};
}

Outcome corruption_properties() {
  const auto t0 = Clock::now();
  const auto cfg = corrupt::SeverityConfig::defaults();
  const auto ph = test::cardiac_phantom(96, 96, 8);
  std::vector<std::string> problems;
  for (const auto kind : corrupt::kAllTransforms) {
    const std::string name(corrupt::name(kind));
    const auto zero = corrupt::apply_params(ph.image, &ph.labels, kind, test::zero_strength(kind), RngStream(1));
    const double zero_err = test::max_abs_diff(zero.volume.data(), ph.image.data());
    if (!(zero_err <= 1e-4)) problems.push_back(fmt::format("{} zero-strength err {:.2e}", name, zero_err));

    std::array<double, 5> curve{};
    for (std::uint64_t s = 0; s < 20; ++s) {
      const RngStream rng = RngStream(s).derive(name);
      for (int sev = 1; sev <= 5; ++sev) {
        const Volume out = corrupt::apply_corruption(ph.image, kind, sev, cfg, rng);
        if (s == 0 && !(corrupt::apply_corruption(ph.image, kind, sev, cfg, rng) == out)) {
          problems.push_back(fmt::format("{} severity {} not deterministic", name, sev));
        }
        curve[static_cast<std::size_t>(sev - 1)] += nrmse(out, ph.image) / 20.0;
      }
    }
    for (std::size_t i = 1; i < 5; ++i) {
      if (!(curve[i] >= curve[i - 1])) {
        problems.push_back(fmt::format("{} decreases: {:.4f} {:.4f} {:.4f} {:.4f} {:.4f}", name, curve[0],
                                       curve[1], curve[2], curve[3], curve[4]));
        break;
      }
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 120.0) problems.push_back(fmt::format("took {:.1f} s", dt));
  std::string detail = fmt::format("{:.1f} s", dt);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Outcome metric_oracles() {
  const Grid g = Grid::with_spacing({6, 6, 1}, {1, 1, 1});
  auto mask = [](const Grid& grid, std::vector<std::size_t> voxels) {
    std::vector<std::uint32_t> data(grid.voxels(), 0);
    for (auto v : voxels) data[v] = 1;
    return LabelMask(grid, std::move(data), 2);
  };
  const double block = metrics::dsc(mask(g, {7, 8, 13, 14}), mask(g, {8, 9, 14, 15}), 1);
  const Grid line = Grid::with_spacing({10, 3, 1}, {1, 1, 1});
  const auto single = metrics::hd95(mask(line, {11}), mask(line, {16}), 1);

  RngStream rng(55);
  double worst_linear = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Grid base = Grid::with_spacing({16, 14, 5}, {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(1.0, 5.0)});
    std::vector<std::uint32_t> da(base.voxels()), db(base.voxels());
    for (auto& v : da) v = rng.bernoulli(0.15) ? 1 : 0;
    for (auto& v : db) v = rng.bernoulli(0.15) ? 1 : 0;
    const double c = rng.uniform(0.3, 4.0);
    const Vec3 s = base.spacing;
    const Grid scaled = Grid::with_spacing(base.dims, {c * s[0], c * s[1], c * s[2]});
    const auto h = metrics::hd95(LabelMask(base, da, 2), LabelMask(base, db, 2), 1);
    const auto hc = metrics::hd95(LabelMask(scaled, da, 2), LabelMask(scaled, db, 2), 1);
    if (!h || !hc) return {false, "hd95 undefined on a non-empty pair"};
    worst_linear = std::max(worst_linear, std::abs(*hc - c * *h) / std::max(c * *h, 1e-12));
  }

  double worst_p = 0.0;
  for (std::size_t n = 3; n <= 50; ++n) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = x[i] + 0.3 + rng.normal() * 1.5;
    }
    const auto r = metrics::paired_t_test(y, x);
    worst_p = std::max(worst_p, std::abs(r.p_value - test::t_two_sided_quadrature(r.t_stat, static_cast<double>(n - 1))));
  }
  const bool pass = block == 0.5 && single && *single == 5.0 && worst_linear <= 1e-12 && worst_p <= 1e-6;
  return {pass, fmt::format("dsc {}, hd95 {}, spacing rel err {:.2e}, t-test p err {:.2e}", block,
                            single ? fmt::format("{}", *single) : "undefined", worst_linear, worst_p)};
}

Outcome rician_statistics() {
  const Grid g = Grid::with_spacing({100, 100, 100}, {1, 1, 1});
  const Volume zero = Volume::filled(g, 1, 0.0f);
  const Volume out = corrupt::rician_noise(zero, 1.0, RngStream(2024), corrupt::NoiseScale::Absolute);
  double sum = 0.0;
  for (float v : out.data()) sum += v;
  const double mean = sum / static_cast<double>(g.voxels());
  const double expect = std::sqrt(M_PI / 2.0);
  const double rel = std::abs(mean - expect) / expect;
  return {rel <= 0.02, fmt::format("mean {:.5f} vs {:.5f} ({:.3f}%)", mean, expect, 100.0 * rel)};
}

analysis::FeatureSet clusters(double separation, double spread, RngStream rng) {
  analysis::FeatureSet fs;
  fs.features.resize(1000, 2);
  for (Eigen::Index i = 0; i < 1000; ++i) {
    const int c = i < 500 ? 0 : 1;
    fs.features(i, 0) = (c == 0 ? separation : -separation) + spread * rng.normal();
    fs.features(i, 1) = spread * rng.normal();
    fs.labels.push_back(c);
  }
  fs.weights.resize(2, 2);
  fs.weights << 1, 0.2, -1, -0.2;
  fs.biases = Eigen::Vector2d(0.1, -0.1);
  return fs;
}

Outcome kvgm_ordering() {
  int wins = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto separated = analysis::kvgm(clusters(3.0, 0.4, RngStream(s)), 32, 10, RngStream(s).derive("k"));
    const auto overlapping = analysis::kvgm(clusters(0.5, 1.5, RngStream(s)), 32, 10, RngStream(s).derive("k"));
    wins += separated.value > overlapping.value ? 1 : 0;
  }

  auto fs = clusters(1.0, 1.0, RngStream(9));
  const auto m = analysis::gradient_normalized_margins(fs);
  double worst_scale = 0.0;
  for (double c : {0.01, 3.0, 250.0}) {
    auto scaled = fs;
    scaled.weights *= c;
    scaled.biases *= c;
    const auto ms = analysis::gradient_normalized_margins(scaled);
    for (std::size_t i = 0; i < m.size(); ++i) worst_scale = std::max(worst_scale, std::abs(ms[i] - m[i]));
  }

  double worst_shift = 0.0;
  for (double delta : {0.0, 0.25, 1.0, 3.75, -2.5}) {
    Eigen::MatrixXd a(2, 1), b(2, 1);
    a << 0, 1;
    b << delta, 1 + delta;
    worst_shift = std::max(worst_shift, std::abs(analysis::wasserstein1(a, b) - std::abs(delta)));
  }
  return {wins == 5 && worst_scale <= 1e-5 && worst_shift <= 1e-6,
          fmt::format("separated > overlapping in {}/5, margin scale err {:.2e}, shift err {:.2e}", wins,
                      worst_scale, worst_shift)};
}

// Header geometry is stored as float32.
bool same_geometry(const Grid& a, const Grid& b) {
  if (!(a.dims == b.dims)) return false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (static_cast<float>(a.spacing[i]) != static_cast<float>(b.spacing[i])) return false;
  }
  return true;
}

Outcome io_and_throughput() {
  test::TempDir dir("acceptance_io");
  std::vector<std::string> problems;

  RngStream rng(3);
  const Grid g = Grid::with_spacing({9, 7, 4}, {0.9, 1.1, 3.0});
  for (auto type : {NiftiType::UInt8, NiftiType::Int16, NiftiType::Int32, NiftiType::Float32, NiftiType::Float64}) {
    std::vector<float> data(g.voxels());
    const bool integral = type == NiftiType::UInt8 || type == NiftiType::Int16 || type == NiftiType::Int32;
    for (auto& v : data) v = integral ? static_cast<float>(rng.below(200)) : static_cast<float>(rng.normal() * 1e3);
    const Volume v(g, 1, data);
    for (const char* ext : {".nii", ".nii.gz"}) {
      const fs::path p = dir.path / (fmt::format("t{}", static_cast<int>(type)) + ext);
      write_nifti(v, p, type);
      const auto back = read_nifti(p);
      if (!(back.volume.data().size() == data.size() &&
            std::equal(data.begin(), data.end(), back.volume.data().begin()) && back.stored_type == type &&
            same_geometry(back.volume.grid(), g))) {
        problems.push_back(fmt::format("round trip of type {} ({}) differs", static_cast<int>(type), ext));
      }
    }
  }

  test::write_phantom_cases(dir.path / "small", {"a_ED", "b_ES"}, 40, 36, 3);
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  cli::CorruptOptions opt;
  opt.in_dir = dir.path / "small";
  opt.transforms = cli::parse_transforms("all");
  opt.severities = cli::parse_severities("all");
  opt.seed = 17;
  opt.out_dir = dir.path / "run1";
  cli::cmd_corrupt(opt);
  opt.out_dir = dir.path / "run2";
  cli::cmd_corrupt(opt);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "run1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = dir.path / "run2" / fs::relative(e.path(), dir.path / "run1");
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      problems.push_back("rerun differs at " + fs::relative(e.path(), dir.path / "run1").string());
      break;
    }
  }
  unsetenv("SOURCE_DATE_EPOCH");

  test::write_phantom_cases(dir.path / "big", {"p1_ED", "p2_ES"}, 256, 256, 10);
  opt.in_dir = dir.path / "big";
  opt.out_dir = dir.path / "big_out";
  opt.jobs = 1;
  const auto t0 = Clock::now();
  const auto report = cli::cmd_corrupt(opt);
  const double dt = seconds_since(t0);
  if (report.records.size() != 140 || !report.errors.empty()) problems.push_back("full run incomplete");
  if (dt >= 60.0) problems.push_back(fmt::format("full run took {:.1f} s", dt));

  std::string detail = fmt::format("5 dtypes x 2 encodings, rerun compared {} files, full run {:.1f} s", files, dt);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// Crude intensity "segmenter" standing in for a trained model.
LabelMask threshold_model(const Volume& image, double shift) {
  std::vector<std::uint32_t> labels(image.grid().voxels());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = image.data()[i];
    labels[i] = v > 0.9 + shift ? 1 : v > 0.65 + shift ? 3 : v > 0.36 + shift ? 2 : 0;
  }
  return LabelMask(image.grid(), std::move(labels), 4);
}

Outcome trend_shape() {
  test::TempDir dir("acceptance_trend");
  test::write_phantom_cases(dir.path / "gt", {"p1_ED", "p2_ES", "p3_ED"}, 48, 48, 3);
  cli::CorruptOptions opt;
  opt.in_dir = dir.path / "gt";
  opt.out_dir = dir.path / "corrupted";
  opt.transforms = cli::parse_transforms("all");
  opt.severities = cli::parse_severities("all");
  opt.seed = 5;
  cli::cmd_corrupt(opt);

  const auto labels = metrics::parse_label_map("LV=1,MYO=2,RV=3");
  const std::map<std::string, double> models = {{"baseline", 0.0}, {"variant", 0.04}};
  std::map<std::string, std::map<std::string, std::map<int, double>>> expected;  // transform, model, severity
  std::vector<std::string> problems;

  auto run_model = [&](const std::string& model, double shift, const fs::path& images, const fs::path& gt,
                       const fs::path& result) {
    const fs::path pred = dir.path / "pred" / fs::relative(result, dir.path / "results");
    fs::create_directories(pred);
    for (const auto& img : cli::list_images(images)) {
      write_nifti(threshold_model(read_nifti(img).volume, shift), pred / (cli::case_id_of(img) + ".nii.gz"));
    }
    cli::EvaluateOptions eval{pred, gt, labels, result / "metrics.csv", "*.nii*"};
    std::ostringstream sink;
    const auto report = cli::cmd_evaluate(eval, sink);
    if (!report.errors.empty()) problems.push_back(model + ": " + report.errors.front());
    std::ifstream written(result / "metrics.csv");
    const auto table = metrics::read_metrics_csv(written);
    if (table.records.size() != report.records.size()) problems.push_back(model + ": csv row count");
    return metrics::aggregate(table.records, metrics::GroupBy::None).back().dsc.mean;
  };

  for (const auto& [model, shift] : models) {
    const double clean = run_model(model, shift, dir.path / "gt", dir.path / "gt", dir.path / "results" / model / "original");
    for (const auto kind : corrupt::kAllTransforms) {
      const std::string name(corrupt::name(kind));
      expected[name][model][0] = clean;
      for (int sev = 1; sev <= 5; ++sev) {
        const fs::path images = dir.path / "corrupted" / name / std::to_string(sev);
        const fs::path gt = corrupt::moves_anatomy(kind) ? images : dir.path / "gt";
        expected[name][model][sev] =
            run_model(model, shift, images, gt, dir.path / "results" / model / name / std::to_string(sev));
      }
    }
  }

  const auto trend = cli::cmd_trend(dir.path / "results", dir.path / "trends");
  if (trend.files.size() != 14) problems.push_back(fmt::format("{} trend files", trend.files.size()));
  if (trend.warnings != 0) problems.push_back(fmt::format("{} missing cells", trend.warnings));
  std::size_t cells = 0;
  for (const auto& file : trend.files) {
    const std::string prefix = "pgf_format_corruption_trends_";
    const std::string name = file.stem().string().substr(prefix.size());
    std::ifstream in(file);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
      std::vector<std::string> cols;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      rows.push_back(cols);
    }
    if (rows.size() != 7 || rows[0] != std::vector<std::string>{"Severity", "baseline", "variant"}) {
      problems.push_back(name + ": unexpected shape");
      continue;
    }
    for (int sev = 0; sev <= 5; ++sev) {
      const auto& row = rows[static_cast<std::size_t>(sev + 1)];
      if (row.size() != 3 || row[0] != std::to_string(sev)) {
        problems.push_back(fmt::format("{}: bad row {}", name, sev));
        continue;
      }
      for (std::size_t m = 1; m < 3; ++m) {
        ++cells;
        const double want = expected[name][rows[0][m]][sev];
        if (row[m] != metrics::format_number(want)) {
          problems.push_back(fmt::format("{} severity {} {}: {} vs {}", name, sev, rows[0][m], row[m],
                                         metrics::format_number(want)));
        }
      }
    }
  }
  std::string detail = fmt::format("{} files, {} cells checked", trend.files.size(), cells);
  for (std::size_t i = 0; i < std::min<std::size_t>(problems.size(), 5); ++i) detail += "; " + problems[i];
  return {problems.empty() && cells == 14 * 6 * 2, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fft matches naive DFT, round trip and Parseval", fft_oracle},
      {"afa single coefficient is a planar wave, mean preserved", afa_oracle},
      {"mixup/cutmix endpoints exact, masks sum to one", mixing_identities},
      {"14 corruptions: zero identity, determinism, monotone severity", corruption_properties},
      {"dsc/hd95/t-test oracles", metric_oracles},
      {"rician noise on a zero image has the Rayleigh mean", rician_statistics},
      {"kvgm ordering, margin scale invariance, W1 shift", kvgm_ordering},
      {"nifti round trip, corrupt rerun identical, full run time", io_and_throughput},
      {"trend csv shape and means match evaluate", trend_shape},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %s  (%s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
