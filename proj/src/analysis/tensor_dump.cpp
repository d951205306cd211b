#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "mrk/analysis/analysis.hpp"
#include "mrk/core/error.hpp"

namespace mrk::analysis {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "tensor blobs are little-endian");

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

const Tensor& find(const TensorDump& dump, const std::string& name) {
  for (const auto& t : dump) {
    if (t.name == name) return t;
  }
  fail(ErrorCode::Format, "feature dump lacks a tensor named '{}'", name);
}

}  // namespace

TensorDump read_tensor_dump(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(ErrorCode::Io, "cannot open tensor manifest '{}'", manifest.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, "'{}' is not valid JSON: {}", manifest.string(), e.what());
  }

  TensorDump dump;
  std::filesystem::path blob_path;
  try {
    if (doc.at("version").get<int>() != 1) {
      fail(ErrorCode::Format, "unsupported tensor manifest version {}", doc.at("version").dump());
    }
    if (doc.at("dtype").get<std::string>() != "f32") {
      fail(ErrorCode::Format, "tensor dtype must be \"f32\", got {}", doc.at("dtype").dump());
    }
    blob_path = manifest.parent_path() / doc.at("blob").get<std::string>();
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) fail(ErrorCode::Io, "cannot open tensor blob '{}'", blob_path.string());
    const auto blob_size = static_cast<std::size_t>(std::filesystem::file_size(blob_path));
    for (const auto& entry : doc.at("tensors")) {
      Tensor t;
      t.name = entry.at("name").get<std::string>();
      t.depth = entry.at("depth").get<int>();
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (t.depth < 0) fail(ErrorCode::Format, "tensor '{}' has negative depth", t.name);
      const std::size_t count = product(t.shape);
      if (offset % 4 != 0 || offset > blob_size || count * 4 > blob_size - offset) {
        fail(ErrorCode::Format, "tensor '{}' (offset {}, {} values) exceeds the {}-byte blob", t.name,
             offset, count, blob_size);
      }
      t.data.resize(count);
      blob.seekg(static_cast<std::streamoff>(offset));
      blob.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(count * 4));
      if (!blob) fail(ErrorCode::Io, "short read of tensor '{}'", t.name);
      dump.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, "malformed tensor manifest '{}': {}", manifest.string(), e.what());
  }
  return dump;
}

void write_tensor_dump(const TensorDump& dump, const std::filesystem::path& manifest,
                       const std::string& blob_name) {
  json tensors = json::array();
  const auto blob_path = manifest.parent_path() / blob_name;
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) fail(ErrorCode::Io, "cannot write '{}'", blob_path.string());
  std::size_t offset = 0;
  for (const auto& t : dump) {
    if (t.data.size() != product(t.shape)) {
      fail(ErrorCode::Validation, "tensor '{}' holds {} values, shape needs {}", t.name,
           t.data.size(), product(t.shape));
    }
    tensors.push_back({{"name", t.name}, {"depth", t.depth}, {"shape", t.shape}, {"offset", offset}});
    blob.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * 4));
    offset += t.data.size() * 4;
  }
  if (!blob) fail(ErrorCode::Io, "write to '{}' failed", blob_path.string());
  const json doc = {{"version", 1}, {"dtype", "f32"}, {"blob", blob_name}, {"tensors", tensors}};
  std::ofstream out(manifest);
  if (!out) fail(ErrorCode::Io, "cannot write '{}'", manifest.string());
  out << doc.dump(2) << '\n';
}

std::vector<std::pair<int, double>> weight_norms(const TensorDump& dump) {
  if (dump.empty()) fail(ErrorCode::InvalidArgument, "tensor dump is empty");
  std::map<int, double> squares;
  for (const auto& t : dump) {
    double ss = 0.0;
    for (float v : t.data) ss += static_cast<double>(v) * v;
    squares[t.depth] += ss;
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [depth, ss] : squares) out.emplace_back(depth, std::sqrt(ss));
  return out;
}

FeatureSet feature_set_from_dump(const TensorDump& dump) {
  const Tensor& f = find(dump, "features");
  const Tensor& l = find(dump, "labels");
  const Tensor& w = find(dump, "weights");
  const Tensor& b = find(dump, "biases");
  if (f.shape.size() != 2 || w.shape.size() != 2 || l.shape.size() != 1 || b.shape.size() != 1) {
    fail(ErrorCode::Format, "feature dump needs features[N,D], labels[N], weights[C,D], biases[C]");
  }
  FeatureSet fs;
  const auto n = static_cast<Eigen::Index>(f.shape[0]);
  const auto d = static_cast<Eigen::Index>(f.shape[1]);
  const auto c = static_cast<Eigen::Index>(w.shape[0]);
  fs.features.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) fs.features(i, j) = f.data[static_cast<std::size_t>(i * d + j)];
  }
  fs.weights.resize(c, static_cast<Eigen::Index>(w.shape[1]));
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < fs.weights.cols(); ++j) {
      fs.weights(i, j) = w.data[static_cast<std::size_t>(i * fs.weights.cols() + j)];
    }
  }
  fs.biases.resize(static_cast<Eigen::Index>(b.data.size()));
  for (std::size_t i = 0; i < b.data.size(); ++i) fs.biases(static_cast<Eigen::Index>(i)) = b.data[i];
  for (float v : l.data) {
    if (!(v >= 0.0f) || std::floor(v) != v) {
      fail(ErrorCode::Format, "labels tensor holds a non-integral or negative value {}", v);
    }
    fs.labels.push_back(static_cast<int>(v));
  }
  fs.validate();
  return fs;
}

}  // namespace mrk::analysis
