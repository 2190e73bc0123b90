#include "commands.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iterator>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "roix/error.hpp"
#include "roix/phantom.hpp"
#include "roix/pipeline.hpp"

namespace roix::cli {

namespace fs = std::filesystem;
using Row = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const auto threads = static_cast<std::size_t>(std::clamp<std::size_t>(static_cast<std::size_t>(workers), 1, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
}

std::string csv_cell(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "nan";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return s;
}

nlohmann::ordered_json number_or_null(double v) {
  return is_undefined(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
}

void write_rows(const std::vector<Row>& rows, const std::vector<std::string>& columns, ReportFormat format,
                std::ostream& out) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(r);
    out << arr.dump(2) << '\n';
    return;
  }
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << (r.contains(columns[c]) ? csv_cell(r.at(columns[c])) : std::string());
    }
    out << '\n';
  }
}

// Routes the report to --report-out when given, else to `out`.
void emit(const RunConfig& config, const std::vector<Row>& rows, const std::vector<std::string>& columns,
          std::ostream& out) {
  if (config.report_path) {
    std::ofstream file(*config.report_path);
    if (!file) throw Error(ErrorCode::io, "cannot write report " + config.report_path->string());
    write_rows(rows, columns, config.report, file);
  } else {
    write_rows(rows, columns, config.report, out);
  }
}

GrayImage load_input(const RunConfig& config, const fs::path& path) {
  return load_image(path, config.image_format, config.raw_layout);
}

std::optional<BackgroundModel> load_background(const RunConfig& config, const fs::path& path) {
  return BackgroundModel{load_input(config, path), BackgroundSource::reference_scan};
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

// Shared background: loaded once, failure reported against every file.
struct SharedBackground {
  std::optional<BackgroundModel> model;
  std::optional<std::string> failure;

  static SharedBackground load(const RunConfig& config) {
    SharedBackground s;
    if (!config.background_path) return s;
    try {
      s.model = load_background(config, *config.background_path);
    } catch (const std::exception& e) {
      s.failure = std::string("background: ") + e.what();
    }
    return s;
  }

  void check() const {
    if (failure) throw Error(ErrorCode::io, *failure);
  }
};

CompressOptions compress_options(const RunConfig& config, const SharedBackground& bg, CodecId codec, double e_abs) {
  CompressOptions o;
  o.codec = codec;
  o.quantization.e_abs = e_abs;
  o.class_count = config.class_count;
  if (bg.model) {
    o.background.kind = BackgroundPolicy::Kind::reference;
    o.background.reference = bg.model;
    o.background.embed = config.embed_background;
  } else if (config.estimate_fraction) {
    o.background.kind = BackgroundPolicy::Kind::estimate;
    o.background.border_fraction = *config.estimate_fraction;
  }
  return o;
}

// Common 8-bit view for SSIM on deeper sources.
std::pair<GrayImage, GrayImage> as_depth8(const GrayImage& a, const GrayImage& b) {
  if (a.depth() == BitDepth::k8 && b.depth() == BitDepth::k8) return {a, b};
  const NormalizationScale scale{std::max({1.0, double(a.max_pixel()), double(b.max_pixel())}), BitDepth::k16};
  auto convert = [&scale](const GrayImage& img) {
    std::vector<std::uint16_t> px(img.size());
    std::transform(img.pixels().begin(), img.pixels().end(), px.begin(),
                   [&scale](auto v) { return normalize_sample(v, scale); });
    return GrayImage(img.width(), img.height(), BitDepth::k8, std::move(px));
  };
  return {convert(a), convert(b)};
}

double ssim_or_undefined(const GrayImage& a, const GrayImage& b) {
  const auto [x, y] = as_depth8(a, b);
  const SsimParams params;
  const auto win = static_cast<std::uint32_t>(params.window);
  if (x.width() < win || x.height() < win) return kUndefined;
  return ssim(x, y, params);
}

BinaryMask nonzero_mask(const GrayImage& img) {
  std::vector<std::uint8_t> bits(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), bits.begin(), [](auto v) { return v ? 1 : 0; });
  return {img.width(), img.height(), std::move(bits)};
}

GrayImage mask_image(const BinaryMask& m) {
  std::vector<std::uint16_t> px(m.size());
  std::transform(m.bits().begin(), m.bits().end(), px.begin(), [](auto b) { return b ? 255 : 0; });
  return {m.width(), m.height(), BitDepth::k8, std::move(px)};
}

std::string image_extension(ImageFormat f) { return f == ImageFormat::pgm ? ".pgm" : ".raw"; }

ExitCode exit_for(bool all_ok) { return all_ok ? ExitCode::success : ExitCode::partial_failure; }

}  // namespace

std::string format_number(double v) {
  if (is_undefined(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void RunConfig::validate() const {
  if (!(e_abs >= 0.0) || !std::isfinite(e_abs)) throw Error(ErrorCode::invalid_argument, "--error-bound must be >= 0");
  if (class_count < 2) throw Error(ErrorCode::invalid_argument, "--classes must be >= 2");
  if (workers < 1) throw Error(ErrorCode::invalid_argument, "--workers must be >= 1");
  if (background_path && estimate_fraction) {
    throw Error(ErrorCode::invalid_argument, "--background and --estimate-background are exclusive");
  }
  if (estimate_fraction && !(*estimate_fraction > 0.0 && *estimate_fraction < 0.5)) {
    throw Error(ErrorCode::invalid_argument, "--estimate-background fraction must lie in (0, 0.5)");
  }
  for (double e : error_bounds) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw Error(ErrorCode::invalid_argument, "error bounds must be >= 0");
  }
  if (image_format == ImageFormat::raw && !raw_layout) {
    throw Error(ErrorCode::invalid_argument, "raw input needs --width, --height and --depth");
  }
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& pattern : inputs) {
    if (pattern.find_first_of("*?[") == std::string::npos) {
      out.emplace_back(pattern);
      continue;
    }
    glob_t g{};
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
      std::vector<fs::path> matches(g.gl_pathv, g.gl_pathv + g.gl_pathc);
      std::sort(matches.begin(), matches.end());
      out.insert(out.end(), matches.begin(), matches.end());
    }
    globfree(&g);
  }
  return out;
}

// --- compress --------------------------------------------------------------

ExitCode cmd_compress(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  const auto files = expand_inputs(config.inputs);
  ensure_dir(config.output_dir);
  const SharedBackground bg = SharedBackground::load(config);

  std::vector<Row> rows(files.size());
  std::vector<char> ok(files.size(), 0);
  std::mutex err_mutex;
  parallel_for(files.size(), config.workers, [&](std::size_t i) {
    const fs::path& file = files[i];
    const fs::path archive_path = config.output_dir / (file.stem().string() + ".roix");
    Row row;
    row["file"] = file.string();
    row["archive"] = archive_path.string();
    try {
      bg.check();
      const GrayImage image = load_input(config, file);
      const auto t0 = Clock::now();
      const CompressResult result = compress_image(image, compress_options(config, bg, config.codec, config.e_abs));
      const double ms = elapsed_ms(t0);
      write_bytes(archive_path, result.archive);
      row["status"] = "ok";
      row["original_bytes"] = image.raw_bytes();
      row["archive_bytes"] = result.archive.size();
      row["cr"] = compression_ratio(image.raw_bytes(), result.archive.size());
      row["compress_ms"] = ms;
      row["spatial_reduction"] = result.bundle.geometry.empty()
                                     ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json(spatial_reduction(result.bundle.geometry,
                                                                                image.width(), image.height()));
      row["error"] = "";
      ok[i] = 1;
    } catch (const std::exception& e) {
      row["status"] = "error";
      row["error"] = e.what();
      std::lock_guard lock(err_mutex);
      err << file.string() << ": " << e.what() << '\n';
    }
    rows[i] = std::move(row);
  });
  emit(config, rows,
       {"file", "archive", "status", "original_bytes", "archive_bytes", "cr", "compress_ms", "spatial_reduction",
        "error"},
       out);
  return exit_for(std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; }));
}

// --- decompress ------------------------------------------------------------

ExitCode cmd_decompress(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  const auto files = expand_inputs(config.inputs);
  ensure_dir(config.output_dir);
  const SharedBackground bg = SharedBackground::load(config);

  std::vector<Row> rows(files.size());
  std::vector<char> ok(files.size(), 0);
  std::mutex err_mutex;
  parallel_for(files.size(), config.workers, [&](std::size_t i) {
    const fs::path& file = files[i];
    const fs::path image_path = config.output_dir / (file.stem().string() + image_extension(config.image_format));
    Row row;
    row["archive"] = file.string();
    row["image"] = image_path.string();
    try {
      bg.check();
      const auto bytes = read_bytes(file);
      const auto t0 = Clock::now();
      DecodedArchive decoded = decode_archive(bytes);
      if (!decoded.background && !bg.model) {
        std::lock_guard lock(err_mutex);
        err << "warning: " << file.string() << " carries no background and none was supplied; "
            << "reconstructing on a zero field\n";
      }
      const GrayImage image = reconstruct_image(decoded.bundle, decoded.background ? decoded.background : bg.model);
      const double ms = elapsed_ms(t0);
      save_image(image, image_path, config.image_format);
      row["status"] = "ok";
      row["width"] = image.width();
      row["height"] = image.height();
      row["e_abs"] = static_cast<double>(decoded.info.e_abs);
      row["decompress_ms"] = ms;
      row["error"] = "";
      ok[i] = 1;
    } catch (const std::exception& e) {
      row["status"] = "error";
      row["error"] = e.what();
      std::lock_guard lock(err_mutex);
      err << file.string() << ": " << e.what() << '\n';
    }
    rows[i] = std::move(row);
  });
  emit(config, rows, {"archive", "image", "status", "width", "height", "e_abs", "decompress_ms", "error"}, out);
  return exit_for(std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; }));
}

// --- segment ---------------------------------------------------------------

ExitCode cmd_segment(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  const auto files = expand_inputs(config.inputs);
  ensure_dir(config.output_dir);
  const SharedBackground bg = SharedBackground::load(config);

  std::vector<Row> rows(files.size());
  std::vector<char> ok(files.size(), 0);
  std::mutex err_mutex;
  parallel_for(files.size(), config.workers, [&](std::size_t i) {
    const fs::path& file = files[i];
    const fs::path mask_path = config.output_dir / (file.stem().string() + ".mask.pgm");
    Row row;
    row["file"] = file.string();
    row["mask"] = mask_path.string();
    try {
      bg.check();
      const GrayImage image = load_input(config, file);
      std::optional<BackgroundModel> background = bg.model;
      if (!background && config.estimate_fraction) background = estimate_background(image, *config.estimate_fraction);
      const GrayImage object = background ? subtract_background(image, *background) : image;
      const GrayImage image8 = normalize_intensity(object).first;
      const auto thresholds = multi_otsu(histogram(image8), config.class_count);
      const RoiBundle bundle = segment_roi(image8, config.class_count);
      save_image(mask_image(rasterize_spans(bundle.geometry, bundle.width, bundle.height)), mask_path,
                 ImageFormat::pgm);
      std::string t;
      for (auto v : thresholds) t += (t.empty() ? "" : ";") + std::to_string(v);
      row["status"] = "ok";
      row["thresholds"] = t;
      row["rows"] = bundle.geometry.size();
      row["roi_pixels"] = bundle.pixel_count();
      row["spatial_reduction"] = bundle.geometry.empty()
                                     ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json(spatial_reduction(bundle.geometry, bundle.width,
                                                                                bundle.height));
      row["error"] = "";
      ok[i] = 1;
    } catch (const std::exception& e) {
      row["status"] = "error";
      row["error"] = e.what();
      std::lock_guard lock(err_mutex);
      err << file.string() << ": " << e.what() << '\n';
    }
    rows[i] = std::move(row);
  });
  emit(config, rows, {"file", "mask", "status", "thresholds", "rows", "roi_pixels", "spatial_reduction", "error"},
       out);
  return exit_for(std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; }));
}

// --- metrics ---------------------------------------------------------------

ExitCode cmd_metrics(const fs::path& a, const fs::path& b, const RunConfig& config, std::ostream& out,
                     std::ostream& err) {
  try {
    const GrayImage x = load_input(config, a);
    const GrayImage y = load_input(config, b);
    if (!x.same_shape(y)) {
      throw Error(ErrorCode::dimension_mismatch, a.string() + " and " + b.string() + " differ in size");
    }
    const BinaryMask pred = nonzero_mask(x);
    const BinaryMask truth = nonzero_mask(y);
    const ConfusionCounts c = confusion(pred, truth);
    const MetricsReport m = overlap_metrics(c);
    Row row;
    row["a"] = a.string();
    row["b"] = b.string();
    row["tp"] = c.tp;
    row["tn"] = c.tn;
    row["fp"] = c.fp;
    row["fn"] = c.fn;
    row["dsc"] = number_or_null(m.dsc);
    row["iou"] = number_or_null(m.iou);
    row["sensitivity"] = number_or_null(m.sensitivity);
    row["specificity"] = number_or_null(m.specificity);
    row["accuracy"] = number_or_null(m.accuracy);
    row["kappa"] = number_or_null(m.kappa);
    row["auc"] = number_or_null(m.auc);
    row["ahd"] = number_or_null(ahd(pred, truth));
    row["ssim"] = number_or_null(ssim_or_undefined(x, y));
    emit(config, {row},
         {"a", "b", "tp", "tn", "fp", "fn", "dsc", "iou", "sensitivity", "specificity", "accuracy", "kappa", "auc",
          "ahd", "ssim"},
         out);
    return ExitCode::success;
  } catch (const std::exception& e) {
    err << "metrics: " << e.what() << '\n';
    return ExitCode::partial_failure;
  }
}

// --- bench -----------------------------------------------------------------

std::vector<BenchRecord> run_bench(const RunConfig& config, std::ostream& err, bool& all_ok) {
  config.validate();
  const auto files = expand_inputs(config.inputs);
  const std::vector<CodecId> codecs = config.codecs.empty() ? std::vector{CodecId::deflate, CodecId::zstd} : config.codecs;
  const std::vector<double> bounds =
      config.error_bounds.empty() ? std::vector<double>{0.1, 1, 5, 10, 15} : config.error_bounds;
  const SharedBackground bg = SharedBackground::load(config);

  std::vector<std::vector<BenchRecord>> per_file(files.size());
  std::vector<char> ok(files.size(), 0);
  std::mutex err_mutex;
  parallel_for(files.size(), config.workers, [&](std::size_t i) {
    try {
      bg.check();
      const GrayImage image = load_input(config, files[i]);
      const auto raw = encode_raw(image);
      for (CodecId codec : codecs) {
        const double standard = compression_ratio(raw.size(), std::max<std::size_t>(1, compress_payload(raw, codec).size()));
        for (double e : bounds) {
          BenchRecord r;
          r.dataset = files[i].stem().string();
          r.codec = std::string(codec_name(codec));
          r.e_abs = e;
          const auto t0 = Clock::now();
          const CompressResult result = compress_image(image, compress_options(config, bg, codec, e));
          r.compress_ms = elapsed_ms(t0);
          const auto t1 = Clock::now();
          const GrayImage back = decompress_image(result.archive, bg.model);
          r.decompress_ms = elapsed_ms(t1);
          r.cr = compression_ratio(image.raw_bytes(), result.archive.size());
          r.rel_improvement = relative_improvement(r.cr, standard);
          r.ssim = ssim_or_undefined(image, back);
          r.spatial_reduction = result.bundle.geometry.empty()
                                    ? kUndefined
                                    : spatial_reduction(result.bundle.geometry, image.width(), image.height());
          per_file[i].push_back(std::move(r));
        }
      }
      ok[i] = 1;
    } catch (const std::exception& e) {
      per_file[i].clear();
      std::lock_guard lock(err_mutex);
      err << files[i].string() << ": " << e.what() << '\n';
    }
  });
  std::vector<BenchRecord> rows;
  for (auto& v : per_file) rows.insert(rows.end(), v.begin(), v.end());
  all_ok = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  return rows;
}

void write_bench(const std::vector<BenchRecord>& records, ReportFormat format, std::ostream& out) {
  std::vector<Row> rows;
  for (const auto& r : records) {
    Row row;
    row["dataset"] = r.dataset;
    row["codec"] = r.codec;
    row["e_abs"] = r.e_abs;
    row["cr"] = r.cr;
    row["rel_improvement"] = r.rel_improvement;
    row["compress_ms"] = r.compress_ms;
    row["decompress_ms"] = r.decompress_ms;
    row["ssim"] = number_or_null(r.ssim);
    row["spatial_reduction"] = number_or_null(r.spatial_reduction);
    rows.push_back(std::move(row));
  }
  write_rows(rows,
             {"dataset", "codec", "e_abs", "cr", "rel_improvement", "compress_ms", "decompress_ms", "ssim",
              "spatial_reduction"},
             format, out);
}

ExitCode cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  bool all_ok = true;
  const auto rows = run_bench(config, err, all_ok);
  if (config.report_path) {
    std::ofstream file(*config.report_path);
    if (!file) throw Error(ErrorCode::io, "cannot write report " + config.report_path->string());
    write_bench(rows, config.report, file);
  } else {
    write_bench(rows, config.report, out);
  }
  return exit_for(all_ok);
}

// --- phantom ---------------------------------------------------------------

ExitCode cmd_phantom(const PhantomConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.count < 1) throw Error(ErrorCode::invalid_argument, "--count must be >= 1");
    if (config.depth != 8 && config.depth != 16) throw Error(ErrorCode::invalid_argument, "--depth must be 8 or 16");
    ensure_dir(config.output_dir);
    PhantomSpec spec;
    spec.width = config.width;
    spec.height = config.height;
    spec.depth = config.depth == 8 ? BitDepth::k8 : BitDepth::k16;
    spec.background_noise = config.background_noise;
    spec.object_noise = config.object_noise;
    for (int i = 0; i < config.count; ++i) {
      spec.seed = config.seed + static_cast<std::uint32_t>(i);
      const Phantom p = make_disk_phantom(spec);
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_%03d.pgm", i);
      const fs::path image_path = config.output_dir / ("phantom" + std::string(suffix));
      save_image(p.image, image_path, ImageFormat::pgm);
      save_image(mask_image(p.truth), config.output_dir / ("truth" + std::string(suffix)), ImageFormat::pgm);
      if (i == 0) save_image(p.background.image, config.output_dir / "background.pgm", ImageFormat::pgm);
      out << image_path.string() << '\n';
    }
    return ExitCode::success;
  } catch (const std::exception& e) {
    err << "phantom: " << e.what() << '\n';
    return ExitCode::partial_failure;
  }
}

}  // namespace roix::cli
