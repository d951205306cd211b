#include "mrk/core/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <string>

#include "mrk/core/error.hpp"

namespace mrk {
namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;

// Byte offsets into the NIfTI-1 header.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

template <typename T>
T load(const std::vector<unsigned char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store(std::vector<unsigned char>& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

bool is_gzip_path(const std::filesystem::path& path) {
  return path.extension() == ".gz";
}

struct GzCloser {
  void operator()(gzFile_s* f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  // gzread passes uncompressed files through unchanged.
  GzHandle file(gzopen(path.string().c_str(), "rb"));
  if (!file) {
    fail(ErrorCode::Io, "cannot open '{}'", path.string());
  }
  std::vector<unsigned char> bytes;
  std::array<unsigned char, 1 << 16> chunk{};
  for (;;) {
    const int got = gzread(file.get(), chunk.data(), static_cast<unsigned>(chunk.size()));
    if (got < 0) {
      int errnum = 0;
      fail(ErrorCode::Format, "corrupt compressed stream in '{}': {}", path.string(),
           gzerror(file.get(), &errnum));
    }
    if (got == 0) break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + got);
  }
  return bytes;
}

void spill(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  const char* mode = is_gzip_path(path) ? "wb6" : "wbT";
  GzHandle file(gzopen(path.string().c_str(), mode));
  if (!file) {
    fail(ErrorCode::Io, "cannot open '{}' for writing", path.string());
  }
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - written, 1u << 30));
    if (gzwrite(file.get(), bytes.data() + written, n) != static_cast<int>(n)) {
      fail(ErrorCode::Io, "write failed for '{}'", path.string());
    }
    written += n;
  }
  if (gzclose(file.release()) != Z_OK) {
    fail(ErrorCode::Io, "closing '{}' failed", path.string());
  }
}

std::size_t type_size(NiftiType type) {
  switch (type) {
    case NiftiType::UInt8: return 1;
    case NiftiType::Int16: return 2;
    case NiftiType::Int32: return 4;
    case NiftiType::Float32: return 4;
    case NiftiType::Float64: return 8;
  }
  return 0;
}

NiftiType parse_type(std::int16_t code) {
  switch (code) {
    case 2: return NiftiType::UInt8;
    case 4: return NiftiType::Int16;
    case 8: return NiftiType::Int32;
    case 16: return NiftiType::Float32;
    case 64: return NiftiType::Float64;
    default: fail(ErrorCode::Unsupported, "unsupported NIfTI datatype code {}", code);
  }
}

double raw_value(const unsigned char* p, NiftiType type) {
  switch (type) {
    case NiftiType::UInt8: return *p;
    case NiftiType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case NiftiType::Int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case NiftiType::Float32: { float v; std::memcpy(&v, p, 4); return v; }
    case NiftiType::Float64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

Affine quaternion_affine(const std::vector<unsigned char>& h, const Vec3& spacing, float qfac) {
  double b = load<float>(h, off::quatern_b);
  double c = load<float>(h, off::quatern_b + 4);
  double d = load<float>(h, off::quatern_b + 8);
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    a = 1.0 / std::sqrt(b * b + c * c + d * d);
    b *= a;
    c *= a;
    d *= a;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  const double xd = spacing[0];
  const double yd = spacing[1];
  const double zd = qfac < 0 ? -spacing[2] : spacing[2];
  Affine m{};
  m[0] = (a * a + b * b - c * c - d * d) * xd;
  m[1] = 2.0 * (b * c - a * d) * yd;
  m[2] = 2.0 * (b * d + a * c) * zd;
  m[4] = 2.0 * (b * c + a * d) * xd;
  m[5] = (a * a + c * c - b * b - d * d) * yd;
  m[6] = 2.0 * (c * d - a * b) * zd;
  m[8] = 2.0 * (b * d - a * c) * xd;
  m[9] = 2.0 * (c * d + a * b) * yd;
  m[10] = (a * a + d * d - c * c - b * b) * zd;
  m[3] = load<float>(h, off::qoffset_x);
  m[7] = load<float>(h, off::qoffset_x + 4);
  m[11] = load<float>(h, off::qoffset_x + 8);
  m[15] = 1.0;
  return m;
}

}  // namespace

NiftiContents read_nifti(const std::filesystem::path& path, const NiftiReadOptions& options) {
  const auto bytes = slurp(path);
  if (bytes.size() < kHeaderSize) {
    fail(ErrorCode::Format, "'{}' is too short for a NIfTI-1 header", path.string());
  }
  const auto sizeof_hdr = load<std::int32_t>(bytes, off::sizeof_hdr);
  if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
    if (sizeof_hdr == 0x5C010000) {
      fail(ErrorCode::Unsupported, "'{}' is big-endian; only little-endian NIfTI is supported",
           path.string());
    }
    fail(ErrorCode::Format, "'{}' has sizeof_hdr {} (expected 348)", path.string(), sizeof_hdr);
  }
  const char* magic = reinterpret_cast<const char*>(bytes.data() + off::magic);
  if (std::memcmp(magic, "ni1\0", 4) == 0) {
    fail(ErrorCode::Unsupported, "'{}' is a two-file (.hdr/.img) NIfTI pair", path.string());
  }
  if (std::memcmp(magic, "n+1\0", 4) != 0) {
    fail(ErrorCode::Format, "'{}' has bad NIfTI magic bytes", path.string());
  }

  std::array<std::int16_t, 8> dim{};
  for (std::size_t i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(bytes, off::dim + 2 * i);
  if (dim[0] < 1 || dim[0] > 7) {
    fail(ErrorCode::Format, "'{}' has invalid dim[0] = {}", path.string(), dim[0]);
  }
  auto extent = [&](int axis) -> std::size_t {
    if (axis > dim[0]) return 1;
    if (dim[axis] < 1) fail(ErrorCode::Format, "'{}' has dim[{}] = {}", path.string(), axis, dim[axis]);
    return static_cast<std::size_t>(dim[axis]);
  };
  for (int axis = 5; axis <= dim[0]; ++axis) {
    if (extent(axis) != 1) {
      fail(ErrorCode::Unsupported, "'{}' has more than 4 non-singleton dimensions", path.string());
    }
  }
  const Dims dims{extent(1), extent(2), extent(3)};
  const std::size_t channels = extent(4);

  const NiftiType type = parse_type(load<std::int16_t>(bytes, off::datatype));
  std::array<float, 8> pixdim{};
  for (std::size_t i = 0; i < 8; ++i) pixdim[i] = load<float>(bytes, off::pixdim + 4 * i);
  const Vec3 spacing{std::abs(pixdim[1]), std::abs(pixdim[2]), std::abs(pixdim[3])};

  Affine affine{};
  const auto qform_code = load<std::int16_t>(bytes, off::qform_code);
  const auto sform_code = load<std::int16_t>(bytes, off::sform_code);
  if (sform_code > 0) {
    for (std::size_t i = 0; i < 12; ++i) affine[i] = load<float>(bytes, off::srow_x + 4 * i);
    affine[15] = 1.0;
  } else if (qform_code > 0) {
    affine = quaternion_affine(bytes, spacing, pixdim[0]);
  } else {
    log_warning(fmt::format("'{}' has neither sform nor qform; using diagonal pixdim affine",
                            path.string()));
    affine = diagonal_affine(spacing);
  }
  const Grid grid{dims, spacing, affine};
  grid.validate();

  const auto vox_offset = static_cast<std::size_t>(load<float>(bytes, off::vox_offset));
  const std::size_t count = dims.voxels() * channels;
  const std::size_t width = type_size(type);
  if (vox_offset < kHeaderSize || bytes.size() < vox_offset + count * width) {
    fail(ErrorCode::Format, "'{}' is truncated: need {} data bytes at offset {}", path.string(),
         count * width, vox_offset);
  }

  const float slope = load<float>(bytes, off::scl_slope);
  const float inter = load<float>(bytes, off::scl_inter);
  const bool scaled = std::isfinite(slope) && slope != 0.0f && !(slope == 1.0f && inter == 0.0f);

  std::vector<float> data(count);
  std::vector<double> values(options.as_labels ? count : 0);
  const unsigned char* base = bytes.data() + vox_offset;
  for (std::size_t i = 0; i < count; ++i) {
    double v = raw_value(base + i * width, type);
    if (scaled) v = static_cast<double>(slope) * v + static_cast<double>(inter);
    if (!std::isfinite(v)) {
      fail(ErrorCode::Validation, "'{}': non-finite voxel value at index {}", path.string(), i);
    }
    data[i] = static_cast<float>(v);
    if (options.as_labels) values[i] = v;
  }

  std::optional<LabelMask> labels;
  if (options.as_labels) {
    if (channels != 1) {
      fail(ErrorCode::Validation, "'{}': label image must have one channel, has {}", path.string(),
           channels);
    }
    std::vector<std::uint32_t> ids(count);
    std::uint32_t max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const double v = values[i];
      if (v < 0.0 || v != std::floor(v) || v > std::numeric_limits<std::int32_t>::max()) {
        fail(ErrorCode::Validation, "'{}': voxel {} value {} is not a non-negative integer label",
             path.string(), i, v);
      }
      ids[i] = static_cast<std::uint32_t>(v);
      max_label = std::max(max_label, ids[i]);
    }
    const std::uint32_t classes =
        options.num_classes > 0 ? options.num_classes : std::max<std::uint32_t>(2, max_label + 1);
    labels.emplace(grid, std::move(ids), classes);
  }

  return NiftiContents{Volume(grid, channels, std::move(data)), std::move(labels), type};
}

namespace {

std::vector<unsigned char> make_header(const Grid& grid, std::size_t channels, NiftiType type) {
  std::vector<unsigned char> h(kVoxOffset, 0);
  store<std::int32_t>(h, off::sizeof_hdr, static_cast<std::int32_t>(kHeaderSize));
  const std::array<std::size_t, 4> extents{grid.dims.nx, grid.dims.ny, grid.dims.nz, channels};
  for (std::size_t e : extents) {
    if (e > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max())) {
      fail(ErrorCode::Overflow, "dimension {} does not fit a NIfTI-1 header", e);
    }
  }
  store<std::int16_t>(h, off::dim, channels > 1 ? 4 : 3);
  for (std::size_t i = 0; i < 4; ++i) {
    store<std::int16_t>(h, off::dim + 2 * (i + 1), static_cast<std::int16_t>(extents[i]));
  }
  for (std::size_t i = 5; i < 8; ++i) store<std::int16_t>(h, off::dim + 2 * i, 1);
  store<std::int16_t>(h, off::datatype, static_cast<std::int16_t>(type));
  store<std::int16_t>(h, off::bitpix, static_cast<std::int16_t>(8 * type_size(type)));
  store<float>(h, off::pixdim, 1.0f);
  for (std::size_t i = 0; i < 3; ++i) {
    store<float>(h, off::pixdim + 4 * (i + 1), static_cast<float>(grid.spacing[i]));
  }
  for (std::size_t i = 4; i < 8; ++i) store<float>(h, off::pixdim + 4 * i, 1.0f);
  store<float>(h, off::vox_offset, static_cast<float>(kVoxOffset));
  store<float>(h, off::scl_slope, 1.0f);
  store<float>(h, off::scl_inter, 0.0f);
  h[off::xyzt_units] = 2 | 8;  // mm, seconds
  const char descrip[] = "mrk";
  std::memcpy(h.data() + off::descrip, descrip, sizeof(descrip));
  store<std::int16_t>(h, off::qform_code, 0);
  store<std::int16_t>(h, off::sform_code, 1);
  for (std::size_t i = 0; i < 12; ++i) {
    store<float>(h, off::srow_x + 4 * i, static_cast<float>(grid.affine[i]));
  }
  std::memcpy(h.data() + off::magic, "n+1\0", 4);
  return h;
}

template <typename T>
void append_integral(std::vector<unsigned char>& out, std::span<const float> data) {
  const std::size_t start = out.size();
  out.resize(start + data.size() * sizeof(T));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = data[i];
    if (v != std::floor(v)) {
      fail(ErrorCode::InvalidArgument, "voxel {} value {} is not an integer", i, v);
    }
    if (v < static_cast<float>(std::numeric_limits<T>::min()) ||
        v > static_cast<float>(std::numeric_limits<T>::max())) {
      fail(ErrorCode::Overflow, "voxel {} value {} overflows the target integer type", i, v);
    }
    const T cast = static_cast<T>(v);
    std::memcpy(out.data() + start + i * sizeof(T), &cast, sizeof(T));
  }
}

}  // namespace

void write_nifti(const Volume& volume, const std::filesystem::path& path, NiftiType type) {
  auto bytes = make_header(volume.grid(), volume.channels(), type);
  const auto data = volume.data();
  switch (type) {
    case NiftiType::UInt8: append_integral<std::uint8_t>(bytes, data); break;
    case NiftiType::Int16: append_integral<std::int16_t>(bytes, data); break;
    case NiftiType::Int32: append_integral<std::int32_t>(bytes, data); break;
    case NiftiType::Float32: {
      const std::size_t start = bytes.size();
      bytes.resize(start + data.size() * sizeof(float));
      std::memcpy(bytes.data() + start, data.data(), data.size() * sizeof(float));
      break;
    }
    case NiftiType::Float64: {
      const std::size_t start = bytes.size();
      bytes.resize(start + data.size() * sizeof(double));
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = data[i];
        std::memcpy(bytes.data() + start + i * sizeof(double), &v, sizeof(double));
      }
      break;
    }
  }
  spill(path, bytes);
}

void write_nifti(const LabelMask& mask, const std::filesystem::path& path) {
  auto bytes = make_header(mask.grid(), 1, NiftiType::Int16);
  const auto labels = mask.labels();
  const std::size_t start = bytes.size();
  bytes.resize(start + labels.size() * sizeof(std::int16_t));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > static_cast<std::uint32_t>(std::numeric_limits<std::int16_t>::max())) {
      fail(ErrorCode::Overflow, "label {} at index {} overflows int16", labels[i], i);
    }
    const auto v = static_cast<std::int16_t>(labels[i]);
    std::memcpy(bytes.data() + start + i * sizeof(std::int16_t), &v, sizeof(v));
  }
  spill(path, bytes);
}

}  // namespace mrk
