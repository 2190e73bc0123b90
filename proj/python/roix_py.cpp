#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roix/codec.hpp"
#include "roix/error.hpp"
#include "roix/image.hpp"
#include "roix/metrics.hpp"
#include "roix/phantom.hpp"
#include "roix/pipeline.hpp"
#include "roix/quantizer.hpp"
#include "roix/segmentation.hpp"

namespace py = pybind11;
using namespace roix;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using U16Array = py::array_t<std::uint16_t, py::array::c_style>;

void require_2d(const py::array& a, const char* what) {
  if (a.ndim() != 2) throw Error(ErrorCode::invalid_argument, std::string(what) + " must be a 2-D array");
}

/// uint8 arrays map to depth 8, uint16 arrays to depth 16.
GrayImage to_image(const py::array& a, const char* what = "image") {
  require_2d(a, what);
  const auto h = static_cast<std::uint32_t>(a.shape(0));
  const auto w = static_cast<std::uint32_t>(a.shape(1));
  std::vector<std::uint16_t> px(static_cast<std::size_t>(w) * h);
  if (py::isinstance<py::array_t<std::uint16_t>>(a)) {
    auto c = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>::ensure(a);
    std::copy(c.data(), c.data() + px.size(), px.begin());
    return {w, h, BitDepth::k16, std::move(px)};
  }
  if (!py::isinstance<py::array_t<std::uint8_t>>(a)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must have dtype uint8 or uint16");
  }
  auto c = U8Array::ensure(a);
  std::copy(c.data(), c.data() + px.size(), px.begin());
  return {w, h, BitDepth::k8, std::move(px)};
}

py::array from_image(const GrayImage& img) {
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width())};
  if (img.depth() == BitDepth::k16) {
    U16Array out(shape);
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return std::move(out);
  }
  U8Array out(shape);
  std::transform(img.pixels().begin(), img.pixels().end(), out.mutable_data(),
                 [](auto v) { return static_cast<std::uint8_t>(v); });
  return std::move(out);
}

BinaryMask to_mask(const py::array& a, const char* what) {
  require_2d(a, what);
  auto c = U8Array::ensure(a.attr("astype")("bool").attr("astype")("uint8"));
  std::vector<std::uint8_t> bits(c.data(), c.data() + c.size());
  return {static_cast<std::uint32_t>(a.shape(1)), static_cast<std::uint32_t>(a.shape(0)), std::move(bits)};
}

py::array_t<bool> from_mask(const BinaryMask& m) {
  py::array_t<bool> out({static_cast<py::ssize_t>(m.height()), static_cast<py::ssize_t>(m.width())});
  std::transform(m.bits().begin(), m.bits().end(), out.mutable_data(), [](auto b) { return b != 0; });
  return out;
}

py::array_t<std::uint32_t> from_geometry(const GeometryTable& g) {
  py::array_t<std::uint32_t> out({static_cast<py::ssize_t>(g.size()), py::ssize_t{3}});
  auto* p = out.mutable_data();
  for (const auto& s : g) *p++ = s.row, *p++ = s.x_start, *p++ = s.x_end;
  return out;
}

GeometryTable to_geometry(const py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.size() != 0 && (a.ndim() != 2 || a.shape(1) != 3)) {
    throw Error(ErrorCode::invalid_argument, "geometry must be an (m, 3) array");
  }
  GeometryTable g(a.size() / 3);
  const auto* p = a.data();
  for (auto& s : g) s = RowSpan{p[0], p[1], p[2]}, p += 3;
  return g;
}

std::vector<std::uint8_t> to_bytes(const py::bytes& b) {
  const std::string_view s = b;
  return {s.begin(), s.end()};
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["dsc"] = r.dsc;
  d["iou"] = r.iou;
  d["sensitivity"] = r.sensitivity;
  d["specificity"] = r.specificity;
  d["accuracy"] = r.accuracy;
  d["kappa"] = r.kappa;
  d["auc"] = r.auc;
  return d;
}

std::optional<BackgroundModel> background_of(const std::optional<py::array>& a) {
  if (!a) return std::nullopt;
  return BackgroundModel{to_image(*a, "background"), BackgroundSource::reference_scan};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ROI-aware error-bounded compression of grayscale projections";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] { return py::exception<Error>(m, "RoixError", PyExc_RuntimeError); });
  // Raised instances carry the error code name as `code`.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object inst = type(py::str(e.what()));
      inst.attr("code") = py::str(std::string(to_string(e.code())));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  // imaging
  m.def(
      "load_image",
      [](const std::string& path, const std::string& format, std::uint32_t width, std::uint32_t height, int depth) {
        if (format == "pgm") return from_image(load_image(path, ImageFormat::pgm));
        if (format != "raw") throw Error(ErrorCode::invalid_argument, "format must be 'pgm' or 'raw'");
        if (depth != 8 && depth != 16) throw Error(ErrorCode::invalid_argument, "depth must be 8 or 16");
        return from_image(load_image(path, ImageFormat::raw,
                                     RawLayout{width, height, depth == 16 ? BitDepth::k16 : BitDepth::k8}));
      },
      py::arg("path"), py::arg("format") = "pgm", py::arg("width") = 0, py::arg("height") = 0, py::arg("depth") = 8,
      "Read a PGM (P5) or headerless little-endian raw image; uint8 or uint16 by depth.");
  m.def(
      "save_image",
      [](const py::array& image, const std::string& path, const std::string& format) {
        if (format != "pgm" && format != "raw") throw Error(ErrorCode::invalid_argument, "format must be 'pgm' or 'raw'");
        save_image(to_image(image), path, format == "pgm" ? ImageFormat::pgm : ImageFormat::raw);
      },
      py::arg("image"), py::arg("path"), py::arg("format") = "pgm");
  m.def(
      "subtract_background",
      [](const py::array& image, const py::array& background) {
        return from_image(subtract_background(to_image(image), {to_image(background, "background")}));
      },
      py::arg("image"), py::arg("background"), "max(image - background, 0) pixel-wise.");
  m.def(
      "estimate_background",
      [](const py::array& image, double border_fraction) {
        return from_image(estimate_background(to_image(image), border_fraction).image);
      },
      py::arg("image"), py::arg("border_fraction") = 0.05, "Constant raster at the median of a border frame.");
  m.def(
      "normalize_intensity",
      [](const py::array& image) {
        auto [img8, scale] = normalize_intensity(to_image(image));
        return py::make_tuple(from_image(img8), scale.i_max);
      },
      py::arg("image"), "Returns (uint8 image, i_max).");

  // segmentation
  m.def(
      "histogram",
      [](const py::array& image8) {
        const Histogram h = histogram(to_image(image8));
        py::array_t<std::uint64_t> out(256);
        std::copy(h.begin(), h.end(), out.mutable_data());
        return out;
      },
      py::arg("image"));
  m.def(
      "multi_otsu",
      [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& hist, int classes) {
        if (hist.size() != 256) throw Error(ErrorCode::invalid_argument, "histogram must have 256 bins");
        Histogram h{};
        std::copy(hist.data(), hist.data() + 256, h.begin());
        const auto t = multi_otsu(h, classes);
        return std::vector<int>(t.begin(), t.end());
      },
      py::arg("histogram"), py::arg("classes") = kDefaultClassCount);
  m.def(
      "largest_component",
      [](const py::array& mask) { return from_mask(largest_component(to_mask(mask, "mask"))); }, py::arg("mask"));
  m.def(
      "segment",
      [](const py::array& image8, int classes) {
        const RoiBundle b = segment_roi(to_image(image8), classes);
        py::dict d;
        d["geometry"] = from_geometry(b.geometry);
        d["mask"] = from_mask(rasterize_spans(b.geometry, b.width, b.height));
        const auto flat = b.flatten();
        d["pixels"] = py::array_t<std::uint8_t>(static_cast<py::ssize_t>(flat.size()), flat.data());
        return d;
      },
      py::arg("image"), py::arg("classes") = kDefaultClassCount,
      "Row spans (row, x_start, x_end exclusive), their raster mask and the gathered pixel stream.");

  // quantizer
  m.def(
      "quantize_abs",
      [](const U8Array& data, double e_abs) {
        const QuantizedRun q = quantize_abs(std::span<const std::uint8_t>(data.data(), data.size()), {e_abs});
        return py::make_tuple(py::array_t<std::uint8_t>(static_cast<py::ssize_t>(q.values.size()), q.values.data()),
                              q.group_boundaries);
      },
      py::arg("data"), py::arg("e_abs"), "Returns (values, group start indices).");
  m.def(
      "verify_bound",
      [](const U8Array& data, const U8Array& values, double e_abs) {
        QuantizedRun q;
        q.values.assign(values.data(), values.data() + values.size());
        return verify_bound(std::span<const std::uint8_t>(data.data(), data.size()), q, {e_abs});
      },
      py::arg("data"), py::arg("values"), py::arg("e_abs"), "Indices where |values - data| > e_abs.");

  // codec
  m.def(
      "compress",
      [](const py::array& image, const std::string& codec, double error_bound, int classes,
         const std::optional<py::array>& background, std::optional<double> estimate_background, bool embed_background) {
        CompressOptions opt;
        opt.codec = parse_codec(codec);
        opt.quantization = {error_bound};
        opt.class_count = classes;
        if (background && estimate_background) {
          throw Error(ErrorCode::invalid_argument, "background and estimate_background are exclusive");
        }
        if (background) {
          opt.background.kind = BackgroundPolicy::Kind::reference;
          opt.background.reference = background_of(background);
        } else if (estimate_background) {
          opt.background.kind = BackgroundPolicy::Kind::estimate;
          opt.background.border_fraction = *estimate_background;
        }
        opt.background.embed = embed_background;
        const CompressResult r = compress_image(to_image(image), opt);
        return py::bytes(reinterpret_cast<const char*>(r.archive.data()), r.archive.size());
      },
      py::arg("image"), py::arg("codec") = "gzip", py::arg("error_bound") = 0.0,
      py::arg("classes") = kDefaultClassCount, py::arg("background") = py::none(),
      py::arg("estimate_background") = py::none(), py::arg("embed_background") = false,
      "Compress one image into a .roix archive.");
  m.def(
      "decompress",
      [](const py::bytes& archive, const std::optional<py::array>& background) {
        return from_image(decompress_image(to_bytes(archive), background_of(background)));
      },
      py::arg("archive"), py::arg("background") = py::none(),
      "Reconstruct an image; an embedded background wins over the one passed in.");
  m.def(
      "archive_info",
      [](const py::bytes& archive) {
        const DecodedArchive d = decode_archive(to_bytes(archive));
        py::dict info;
        info["version"] = d.info.version;
        info["codec"] = std::string(codec_name(d.info.codec));
        info["e_abs"] = static_cast<double>(d.info.e_abs);
        info["width"] = d.info.width;
        info["height"] = d.info.height;
        info["depth"] = static_cast<int>(d.info.source_depth);
        info["i_max"] = static_cast<double>(d.info.i_max);
        info["rows"] = d.info.rows;
        info["has_background"] = d.info.has_background();
        info["geometry"] = from_geometry(d.bundle.geometry);
        return info;
      },
      py::arg("archive"));
  m.def("compression_ratio", &compression_ratio, py::arg("original_size"), py::arg("archive_size"));
  m.def("relative_improvement", &relative_improvement, py::arg("roix_ratio"), py::arg("standard_ratio"));

  // metrics
  m.def(
      "overlap_metrics",
      [](const py::array& pred, const py::array& truth) {
        const ConfusionCounts c = confusion(to_mask(pred, "pred"), to_mask(truth, "truth"));
        py::dict d = report_dict(overlap_metrics(c));
        d["tp"] = c.tp;
        d["tn"] = c.tn;
        d["fp"] = c.fp;
        d["fn"] = c.fn;
        return d;
      },
      py::arg("pred"), py::arg("truth"), "Confusion counts and overlap scores; NaN where undefined.");
  m.def(
      "ahd", [](const py::array& a, const py::array& b) { return ahd(to_mask(a, "a"), to_mask(b, "b")); },
      py::arg("a"), py::arg("b"), "Average Hausdorff distance between the set pixels of two masks.");
  m.def(
      "ssim", [](const py::array& x, const py::array& y) { return ssim(to_image(x, "x"), to_image(y, "y")); },
      py::arg("x"), py::arg("y"), "Mean SSIM, Gaussian 11x11 window, sigma 1.5, uint8 inputs.");
  m.def(
      "spatial_reduction",
      [](const py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>& geometry, std::uint32_t width,
         std::uint32_t height) { return spatial_reduction(to_geometry(geometry), width, height); },
      py::arg("geometry"), py::arg("width"), py::arg("height"));

  // synthetic data
  m.def(
      "make_disk_phantom",
      [](std::uint32_t width, std::uint32_t height, int depth, double background_noise, double object_noise,
         std::uint32_t seed) {
        if (depth != 8 && depth != 16) throw Error(ErrorCode::invalid_argument, "depth must be 8 or 16");
        PhantomSpec spec;
        spec.width = width;
        spec.height = height;
        spec.depth = depth == 16 ? BitDepth::k16 : BitDepth::k8;
        spec.background_noise = background_noise;
        spec.object_noise = object_noise;
        spec.seed = seed;
        const Phantom p = make_disk_phantom(spec);
        return py::make_tuple(from_image(p.image), from_image(p.background.image), from_mask(p.truth));
      },
      py::arg("width") = 256, py::arg("height") = 256, py::arg("depth") = 8, py::arg("background_noise") = 0.0,
      py::arg("object_noise") = 1.5, py::arg("seed") = 1, "Returns (image, background, truth mask).");
}
