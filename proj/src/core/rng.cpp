#include "mrk/core/rng.hpp"

#include <cmath>
#include <numbers>

#include "mrk/core/error.hpp"

namespace mrk {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_token(std::string_view token) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a offset basis
  for (unsigned char ch : token) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  // Length folded in so that "" and "\0" differ.
  return mix64(h ^ (token.size() * kGolden));
}

// Log of a Gamma(shape, 1) variate; stays finite for small shapes where the
// variate itself underflows.
double log_gamma_variate(RngStream& rng, double shape) {
  const double boost = shape < 1.0 ? 1.0 : 0.0;
  const double d = shape + boost - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double log_value = 0.0;
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      log_value = std::log(d * v);
      break;
    }
  }
  if (boost > 0.0) {
    log_value += std::log(1.0 - rng.uniform()) / shape;
  }
  return log_value;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed)
    : master_seed_(master_seed), key_(mix64(master_seed ^ kGolden)) {}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t key, std::vector<std::string> path)
    : master_seed_(master_seed), key_(key), path_(std::move(path)) {}

RngStream RngStream::derive(std::string_view token) const {
  auto path = path_;
  path.emplace_back(token);
  const std::uint64_t child = mix64(mix64(key_ ^ hash_token(token)) + kGolden);
  return RngStream(master_seed_, child, std::move(path));
}

RngStream RngStream::derive(std::uint64_t token) const {
  return derive(std::to_string(token));
}

std::string RngStream::path_string() const {
  std::string out;
  for (const auto& token : path_) {
    if (!out.empty()) out += '/';
    out += token;
  }
  return out;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) {
    fail(ErrorCode::InvalidArgument, "RngStream::below requires n > 0");
  }
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t bits = 0;
  do {
    bits = next_u64();
  } while (bits >= limit);
  return bits % n;
}

bool RngStream::bernoulli(double p) {
  return uniform() < p;
}

double RngStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::exponential(double mean) {
  return -mean * std::log(1.0 - uniform());
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) {
    fail(ErrorCode::InvalidArgument, "gamma shape must be positive, got {}", shape);
  }
  return std::exp(log_gamma_variate(*this, shape));
}

double RngStream::beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    fail(ErrorCode::InvalidArgument, "beta parameters must be positive, got ({}, {})", a, b);
  }
  const double log_x = log_gamma_variate(*this, a);
  const double log_y = log_gamma_variate(*this, b);
  return 1.0 / (1.0 + std::exp(log_y - log_x));
}

}  // namespace mrk
