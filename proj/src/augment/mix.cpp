#include <cmath>

#include "mrk/augment/augment.hpp"
#include "mrk/core/error.hpp"

namespace mrk::augment {

void check_compatible(const Sample& a, const Sample& b) {
  if (!(a.image.grid() == b.image.grid()) || a.image.channels() != b.image.channels()) {
    fail(ErrorCode::GridMismatch, "samples differ in grid or channel count");
  }
  if (!(a.mask.grid() == a.image.grid()) || !(b.mask.grid() == b.image.grid())) {
    fail(ErrorCode::GridMismatch, "mask grid does not match its image");
  }
  if (a.mask.num_classes() != b.mask.num_classes()) {
    fail(ErrorCode::GridMismatch, "samples have {} and {} classes", a.mask.num_classes(),
         b.mask.num_classes());
  }
}

namespace {

std::vector<float> blend(std::span<const float> a, std::span<const float> b, double lambda) {
  std::vector<float> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<float>(lambda * a[i] + (1.0 - lambda) * b[i]);
  }
  return out;
}

}  // namespace

Sample mixup_with_lambda(const Sample& a, const Sample& b, double lambda) {
  check_compatible(a, b);
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "mixing weight must be in [0, 1], got {}", lambda);
  }
  return {a.image.with_data(blend(a.image.data(), b.image.data(), lambda)),
          ProbMask(a.mask.grid(), a.mask.num_classes(),
                   blend(a.mask.probs(), b.mask.probs(), lambda))};
}

MixResult mixup(const Sample& a, const Sample& b, const MixupParams& params, RngStream rng) {
  if (!(params.beta_alpha > 0.0)) {
    fail(ErrorCode::InvalidArgument, "beta_alpha must be > 0, got {}", params.beta_alpha);
  }
  check_compatible(a, b);
  const double lambda = rng.beta(params.beta_alpha, params.beta_alpha);
  return {mixup_with_lambda(a, b, lambda), lambda};
}

Sample cutmix_with_box(const Sample& a, const Sample& b, const Box& box) {
  check_compatible(a, b);
  const Dims& d = a.image.dims();
  for (std::size_t ax = 0; ax < 3; ++ax) {
    if (box.lo[ax] > box.hi[ax] || box.hi[ax] > d[ax]) {
      fail(ErrorCode::InvalidArgument, "cutmix box [{}, {}) exceeds axis {} of length {}",
           box.lo[ax], box.hi[ax], ax, d[ax]);
    }
  }
  std::vector<float> image(a.image.data().begin(), a.image.data().end());
  std::vector<float> probs(a.mask.probs().begin(), a.mask.probs().end());
  const auto bi = b.image.data();
  const auto bp = b.mask.probs();
  const std::size_t n = d.voxels();
  for (std::size_t z = box.lo[2]; z < box.hi[2]; ++z) {
    for (std::size_t y = box.lo[1]; y < box.hi[1]; ++y) {
      for (std::size_t x = box.lo[0]; x < box.hi[0]; ++x) {
        const std::size_t i = (z * d.ny + y) * d.nx + x;
        for (std::size_t c = 0; c < a.image.channels(); ++c) image[c * n + i] = bi[c * n + i];
        for (std::size_t c = 0; c < a.mask.num_classes(); ++c) probs[c * n + i] = bp[c * n + i];
      }
    }
  }
  return {a.image.with_data(std::move(image)),
          ProbMask(a.mask.grid(), a.mask.num_classes(), std::move(probs))};
}

Box draw_cutmix_box(const Dims& dims, double lambda, RngStream& rng) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "mixing weight must be in [0, 1], got {}", lambda);
  }
  int active = 0;
  for (std::size_t a = 0; a < 3; ++a) active += dims[a] > 1 ? 1 : 0;
  const double side = active > 0 ? std::pow(1.0 - lambda, 1.0 / active) : 1.0 - lambda;
  Box box;
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t n = dims[a];
    std::size_t s = n;
    if (n > 1) {
      s = static_cast<std::size_t>(std::round(static_cast<double>(n) * side));
    } else if (lambda == 1.0) {
      s = 0;
    }
    const std::size_t lo = rng.below(n - s + 1);
    box.lo[a] = lo;
    box.hi[a] = lo + s;
  }
  return box;
}

CutMixResult cutmix(const Sample& a, const Sample& b, const MixupParams& params, RngStream rng) {
  if (!(params.beta_alpha > 0.0)) {
    fail(ErrorCode::InvalidArgument, "beta_alpha must be > 0, got {}", params.beta_alpha);
  }
  check_compatible(a, b);
  const double lambda = rng.beta(params.beta_alpha, params.beta_alpha);
  const Box box = draw_cutmix_box(a.image.dims(), lambda, rng);
  return {cutmix_with_box(a, b, box), lambda, box};
}

std::vector<MixResult> mixup_batch(const std::vector<Sample>& batch, const MixupParams& params,
                                   RngStream rng) {
  std::vector<MixResult> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back(mixup(batch[i], batch[batch.size() - 1 - i], params, rng.derive(i)));
  }
  return out;
}

std::vector<CutMixResult> cutmix_batch(const std::vector<Sample>& batch, const MixupParams& params,
                                       RngStream rng) {
  std::vector<CutMixResult> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back(cutmix(batch[i], batch[batch.size() - 1 - i], params, rng.derive(i)));
  }
  return out;
}

RngStream augment_stream(std::uint64_t seed, std::string_view sample_id, std::string_view op) {
  return RngStream(seed).derive(sample_id).derive(op);
}

}  // namespace mrk::augment
