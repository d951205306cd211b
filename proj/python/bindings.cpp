#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mrk/augment/augment.hpp"
#include "mrk/core/error.hpp"
#include "mrk/corruptions/corrupt.hpp"

namespace py = pybind11;
using namespace mrk;

namespace {

using Spacing = std::array<double, 3>;

// Arrays are (Z, Y, X) or (C, Z, Y, X), C-contiguous float32. Copies happen
// here, under the GIL, so no buffer is touched once it is released.
struct Layout {
  std::size_t leading = 1;
  Dims dims;
};

Layout check_array(const py::array& arr, const char* what, bool allow_3d) {
  if (!arr.dtype().is(py::dtype::of<float>())) {
    throw py::type_error(std::string(what) + " must be float32, got " + std::string(py::str(arr.dtype())));
  }
  if (!(arr.flags() & py::array::c_style)) throw py::value_error(std::string(what) + " must be C-contiguous");
  const auto nd = arr.ndim();
  if (!(nd == 4 || (allow_3d && nd == 3))) {
    throw py::value_error(std::string(what) + (allow_3d ? " must be 3-D or 4-D" : " must be 4-D"));
  }
  const auto s = [&](py::ssize_t i) { return static_cast<std::size_t>(arr.shape(i)); };
  Layout l;
  if (nd == 4) l.leading = s(0);
  l.dims = {s(nd - 1), s(nd - 2), s(nd - 3)};
  return l;
}

std::vector<float> copy_of(const py::array& arr) {
  const auto* p = static_cast<const float*>(arr.data());
  return std::vector<float>(p, p + arr.size());
}

Volume to_volume(const py::array& arr, const Spacing& spacing) {
  const Layout l = check_array(arr, "image", true);
  return Volume(Grid::with_spacing(l.dims, {spacing[0], spacing[1], spacing[2]}), l.leading, copy_of(arr));
}

Sample to_sample(const py::array& image, const py::array& mask, const Spacing& spacing) {
  Volume v = to_volume(image, spacing);
  const Layout m = check_array(mask, "mask", false);
  if (!(m.dims == v.dims())) throw py::value_error("image and mask shapes differ");
  return {std::move(v), ProbMask(Grid::with_spacing(m.dims, {spacing[0], spacing[1], spacing[2]}), m.leading,
                                 copy_of(mask))};
}

py::array_t<float> to_array(std::span<const float> data, std::size_t leading, const Dims& d, bool squeeze) {
  std::vector<py::ssize_t> shape;
  if (!squeeze) shape.push_back(static_cast<py::ssize_t>(leading));
  shape.insert(shape.end(), {static_cast<py::ssize_t>(d.nz), static_cast<py::ssize_t>(d.ny),
                             static_cast<py::ssize_t>(d.nx)});
  py::array_t<float> out(shape);
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

py::array_t<float> image_array(const Volume& v, bool squeeze) {
  return to_array(v.data(), v.channels(), v.dims(), squeeze);
}

py::array_t<float> mask_array(const ProbMask& m) {
  return to_array(m.probs(), m.num_classes(), m.grid().dims, false);
}

py::tuple box_tuple(const augment::Box& b) {
  // (z, y, x) order to match the array axes
  return py::make_tuple(py::make_tuple(b.lo[2], b.lo[1], b.lo[0]), py::make_tuple(b.hi[2], b.hi[1], b.hi[0]));
}

template <typename F>
auto unlocked(F&& f) {
  py::gil_scoped_release release;
  return f();
}

py::array_t<float> apply_corruption_py(const py::array& image, const Spacing& spacing, const std::string& kind,
                                       int severity, std::uint64_t seed, const std::string& case_id) {
  const auto parsed = corrupt::parse_transform_kind(kind);
  if (!parsed) fail(ErrorCode::InvalidArgument, "unknown transform '{}'", kind);
  const auto k = *parsed;
  const Volume v = to_volume(image, spacing);
  const bool squeeze = image.ndim() == 3;
  const auto cfg = corrupt::SeverityConfig::defaults();
  const Volume out = unlocked(
      [&] { return corrupt::apply_corruption(v, k, severity, cfg, corrupt::corruption_stream(seed, case_id, k, severity)); });
  return image_array(out, squeeze);
}

py::tuple mixup_py(const py::array& ia, const py::array& ma, const py::array& ib, const py::array& mb,
                   double alpha, std::uint64_t seed, const Spacing& spacing) {
  const Sample a = to_sample(ia, ma, spacing), b = to_sample(ib, mb, spacing);
  const auto r = unlocked([&] { return augment::mixup(a, b, {alpha}, RngStream(seed)); });
  return py::make_tuple(image_array(r.sample.image, ia.ndim() == 3), mask_array(r.sample.mask), r.lambda);
}

py::tuple cutmix_py(const py::array& ia, const py::array& ma, const py::array& ib, const py::array& mb,
                    double alpha, std::uint64_t seed, const Spacing& spacing) {
  const Sample a = to_sample(ia, ma, spacing), b = to_sample(ib, mb, spacing);
  const auto r = unlocked([&] { return augment::cutmix(a, b, {alpha}, RngStream(seed)); });
  return py::make_tuple(image_array(r.sample.image, ia.ndim() == 3), mask_array(r.sample.mask), r.lambda,
                        box_tuple(r.box));
}

std::vector<Sample> to_batch(const std::vector<std::pair<py::array, py::array>>& batch, const Spacing& spacing) {
  std::vector<Sample> out;
  out.reserve(batch.size());
  for (const auto& [image, mask] : batch) out.push_back(to_sample(image, mask, spacing));
  return out;
}

py::list mixup_batch_py(const std::vector<std::pair<py::array, py::array>>& batch, double alpha,
                        std::uint64_t seed, const Spacing& spacing) {
  const auto samples = to_batch(batch, spacing);
  const auto results = unlocked([&] { return augment::mixup_batch(samples, {alpha}, RngStream(seed)); });
  py::list out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const bool squeeze = batch[i].first.ndim() == 3;
    out.append(py::make_tuple(image_array(results[i].sample.image, squeeze), mask_array(results[i].sample.mask),
                              results[i].lambda));
  }
  return out;
}

py::list cutmix_batch_py(const std::vector<std::pair<py::array, py::array>>& batch, double alpha,
                         std::uint64_t seed, const Spacing& spacing) {
  const auto samples = to_batch(batch, spacing);
  const auto results = unlocked([&] { return augment::cutmix_batch(samples, {alpha}, RngStream(seed)); });
  py::list out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const bool squeeze = batch[i].first.ndim() == 3;
    out.append(py::make_tuple(image_array(results[i].sample.image, squeeze), mask_array(results[i].sample.mask),
                              results[i].lambda, box_tuple(results[i].box)));
  }
  return out;
}

augment::AfaParams afa_params(double mu) {
  augment::AfaParams p;
  p.mu = mu;
  return p;
}

py::array_t<float> afa_augment_py(const py::array& image, double mu, std::uint64_t seed, const Spacing& spacing) {
  const Volume v = to_volume(image, spacing);
  const Volume out = unlocked([&] { return augment::afa_augment(v, afa_params(mu), RngStream(seed)); });
  return image_array(out, image.ndim() == 3);
}

py::tuple make_afa_pair_py(const py::array& image, const py::array& mask, double mu, std::uint64_t seed,
                           const Spacing& spacing) {
  const Sample s = to_sample(image, mask, spacing);
  const auto pair = unlocked([&] { return augment::make_afa_pair(s, afa_params(mu), RngStream(seed)); });
  const bool squeeze = image.ndim() == 3;
  return py::make_tuple(image_array(pair.clean.image, squeeze), image_array(pair.afa.image, squeeze),
                        mask_array(pair.afa.mask));
}

py::tuple base_augment_py(const py::array& image, const py::array& mask, std::uint64_t seed,
                          const std::optional<std::string>& config, const Spacing& spacing) {
  const Sample s = to_sample(image, mask, spacing);
  const auto cfg = config ? augment::AugmentConfig::from_json(nlohmann::json::parse(*config))
                          : augment::AugmentConfig{};
  const Sample out = unlocked([&] { return augment::base_augment(s, cfg, RngStream(seed)); });
  return py::make_tuple(image_array(out.image, image.ndim() == 3), mask_array(out.mask));
}

}  // namespace

PYBIND11_MODULE(_mrk, m) {
  m.attr("__version__") = MRK_VERSION;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
      switch (e.code()) {
        case ErrorCode::Io: PyErr_SetString(PyExc_OSError, msg.c_str()); return;
        case ErrorCode::Overflow: PyErr_SetString(PyExc_OverflowError, msg.c_str()); return;
        case ErrorCode::Unsupported: PyErr_SetString(PyExc_NotImplementedError, msg.c_str()); return;
        default: PyErr_SetString(PyExc_ValueError, msg.c_str()); return;
      }
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  const Spacing unit{1.0, 1.0, 1.0};
  m.def("transforms", [] {
    std::vector<std::string> names;
    for (auto k : corrupt::kAllTransforms) names.emplace_back(corrupt::name(k));
    return names;
  });
  m.def("apply_corruption", &apply_corruption_py, py::arg("image"), py::arg("spacing"), py::arg("kind"),
        py::arg("severity"), py::arg("seed"), py::arg("case_id") = "",
        "Corrupts a (Z, Y, X) or (C, Z, Y, X) float32 array; same stream as the CLI for equal seed and case id.");
  m.def("mixup", &mixup_py, py::arg("image_a"), py::arg("mask_a"), py::arg("image_b"), py::arg("mask_b"),
        py::arg("alpha") = 0.2, py::arg("seed") = 0, py::arg("spacing") = unit);
  m.def("cutmix", &cutmix_py, py::arg("image_a"), py::arg("mask_a"), py::arg("image_b"), py::arg("mask_b"),
        py::arg("alpha") = 0.2, py::arg("seed") = 0, py::arg("spacing") = unit);
  m.def("mixup_batch", &mixup_batch_py, py::arg("batch"), py::arg("alpha") = 0.2, py::arg("seed") = 0,
        py::arg("spacing") = unit);
  m.def("cutmix_batch", &cutmix_batch_py, py::arg("batch"), py::arg("alpha") = 0.2, py::arg("seed") = 0,
        py::arg("spacing") = unit);
  m.def("afa_augment", &afa_augment_py, py::arg("image"), py::arg("mu") = 0.05, py::arg("seed") = 0,
        py::arg("spacing") = unit);
  m.def("make_afa_pair", &make_afa_pair_py, py::arg("image"), py::arg("mask"), py::arg("mu") = 0.05,
        py::arg("seed") = 0, py::arg("spacing") = unit);
  m.def("base_augment", &base_augment_py, py::arg("image"), py::arg("mask"), py::arg("seed") = 0,
        py::arg("config") = py::none(), py::arg("spacing") = unit,
        "config is the JSON text of an augmentation config; defaults apply when omitted.");
}
