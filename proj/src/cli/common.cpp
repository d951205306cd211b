#include <fnmatch.h>

#include <algorithm>
#include <charconv>

#include "mrk/cli/commands.hpp"
#include "mrk/core/error.hpp"

namespace mrk::cli {
namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

int parse_int(const std::string& text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::InvalidArgument, "'{}' is not an integer", text);
  }
  return v;
}

bool is_mask_name(const std::string& case_id) {
  return case_id.size() > 3 && case_id.compare(case_id.size() - 3, 3, "_gt") == 0;
}

}  // namespace

std::string case_id_of(const fs::path& path) {
  std::string name = path.filename().string();
  for (const std::string_view ext : {".nii.gz", ".nii"}) {
    if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      return name.substr(0, name.size() - ext.size());
    }
  }
  return name;
}

std::vector<fs::path> list_images(const fs::path& dir, const std::string& pattern) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, "'{}' is not a directory", dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (fnmatch(pattern.c_str(), name.c_str(), 0) != 0) continue;
    if (name.find(".nii") == std::string::npos) continue;
    if (is_mask_name(case_id_of(entry.path()))) continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<fs::path> find_mask(const fs::path& dir, const std::string& case_id) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    const fs::path p = dir / (case_id + "_gt" + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::vector<corrupt::TransformKind> parse_transforms(const std::string& text) {
  if (text == "all") {
    return {corrupt::kAllTransforms.begin(), corrupt::kAllTransforms.end()};
  }
  std::vector<corrupt::TransformKind> out;
  for (const auto& item : split_list(text)) {
    const auto kind = corrupt::parse_transform_kind(item);
    if (!kind) fail(ErrorCode::InvalidArgument, "unknown transform '{}'", item);
    if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no transforms selected");
  return out;
}

std::vector<int> parse_severities(const std::string& text) {
  std::vector<int> out;
  auto add = [&](int s) {
    if (s < corrupt::kMinSeverity || s > corrupt::kMaxSeverity) {
      fail(ErrorCode::InvalidArgument, "severity {} is outside 1..5", s);
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  if (text == "all") {
    for (int s = corrupt::kMinSeverity; s <= corrupt::kMaxSeverity; ++s) add(s);
    return out;
  }
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      add(parse_int(item));
    } else {
      const int lo = parse_int(item.substr(0, dash));
      const int hi = parse_int(item.substr(dash + 1));
      if (lo > hi) fail(ErrorCode::InvalidArgument, "empty severity range '{}'", item);
      for (int s = lo; s <= hi; ++s) add(s);
    }
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no severities selected");
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mrk::cli
