#include "mrk/metrics/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <tuple>

#include "mrk/core/error.hpp"

namespace mrk::metrics {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void check_cell(const std::string& text, const char* what) {
  if (text.find_first_of(",\n\r") != std::string::npos) {
    fail(ErrorCode::InvalidArgument, "{} '{}' contains a comma or line break", what, text);
  }
}

double parse_double(const std::string& text, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(ErrorCode::Format, "{}:{}: '{}' is not a finite number", source, line, text);
  }
  return v;
}

// Value exactly as it will appear after a write / read cycle.
double as_written(double v) {
  const std::string text = format_number(v);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

std::string stat_cells(const Stat& s) {
  return fmt::format("{},{},{}", s.n, s.n > 0 ? format_number(s.mean) : "",
                     s.std ? format_number(*s.std) : "");
}

}  // namespace

LabelMap parse_label_map(const std::string& text) {
  LabelMap out;
  for (const auto& item : split(text, ',')) {
    const std::string entry = trim(item);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::InvalidArgument, "label entry '{}' is not name=id", entry);
    }
    const std::string name = trim(entry.substr(0, eq));
    const std::string id = trim(entry.substr(eq + 1));
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), value);
    if (ec != std::errc() || ptr != id.data() + id.size() || value == 0) {
      fail(ErrorCode::InvalidArgument, "label '{}' needs a positive integer id, got '{}'", name, id);
    }
    out.emplace_back(name, value);
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "label map '{}' is empty", text);
  return out;
}

std::string format_number(double value) { return fmt::format("{:.6g}", value); }

void write_metrics_csv(std::ostream& out, std::vector<MetricsRecord> records,
                       const LabelMap& labels) {
  for (auto& r : records) {
    check_cell(r.case_id, "case id");
    check_cell(r.structure, "structure");
    check_cell(r.phase, "phase");
    r.dsc = as_written(r.dsc);
    if (r.hd95) r.hd95 = as_written(*r.hd95);
  }
  std::sort(records.begin(), records.end(), [](const MetricsRecord& a, const MetricsRecord& b) {
    return std::tie(a.case_id, a.structure) < std::tie(b.case_id, b.structure);
  });
  out << "# labels:";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << (i ? "," : " ") << labels[i].first << '=' << labels[i].second;
  }
  out << '\n';
  out << kMetricsHeader << '\n';
  for (const auto& r : records) {
    out << r.case_id << ',' << r.structure << ',' << r.phase << ',' << format_number(r.dsc) << ','
        << (r.hd95 ? format_number(*r.hd95) : "") << ',' << (r.hd95 ? 0 : 1) << '\n';
  }
  if (records.empty()) return;
  out << "# summary,group,dsc_n,dsc_mean,dsc_std,hd95_n,hd95_mean,hd95_std,excluded\n";
  for (const auto& row : aggregate(records, GroupBy::Structure)) {
    out << "# summary," << row.group << ',' << stat_cells(row.dsc) << ',' << stat_cells(row.hd95)
        << ',' << row.excluded << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path, std::vector<MetricsRecord> records,
                       const LabelMap& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '{}'", path.string());
  write_metrics_csv(out, std::move(records), labels);
  if (!out) fail(ErrorCode::Io, "write to '{}' failed", path.string());
}

MetricsTable read_metrics_csv(std::istream& in, const std::string& source) {
  MetricsTable table;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view tag = "# labels:";
      if (line.rfind(tag, 0) == 0) {
        const std::string rest = trim(line.substr(tag.size()));
        if (!rest.empty()) table.labels = parse_label_map(rest);
      }
      continue;
    }
    if (!header) {
      if (line != kMetricsHeader) {
        fail(ErrorCode::Format, "{}: header must be '{}', got '{}'", source, kMetricsHeader, line);
      }
      header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 6) {
      fail(ErrorCode::Format, "{}:{}: expected 6 cells, got {}", source, number, cells.size());
    }
    MetricsRecord r;
    r.case_id = cells[0];
    r.structure = cells[1];
    r.phase = cells[2];
    r.dsc = parse_double(cells[3], source, number);
    if (!cells[4].empty()) r.hd95 = parse_double(cells[4], source, number);
    if (cells[5] != (r.hd95 ? "0" : "1")) {
      fail(ErrorCode::Format, "{}:{}: excluded flag '{}' disagrees with the hd95 cell", source,
           number, cells[5]);
    }
    table.records.push_back(std::move(r));
  }
  if (!header) fail(ErrorCode::Format, "{}: missing header line", source);
  return table;
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '{}'", path.string());
  return read_metrics_csv(in, path.string());
}

}  // namespace mrk::metrics
