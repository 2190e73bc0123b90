#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roix/codec.hpp"
#include "roix/image.hpp"
#include "roix/metrics.hpp"

namespace roix::cli {

enum class ExitCode : int { success = 0, partial_failure = 1, usage = 2 };
enum class ReportFormat { json, csv };

struct RunConfig {
  std::vector<std::string> inputs;  // paths or glob patterns
  std::filesystem::path output_dir = ".";
  std::optional<std::filesystem::path> report_path;  // stdout when empty
  ReportFormat report = ReportFormat::json;
  int workers = 1;

  ImageFormat image_format = ImageFormat::pgm;
  std::optional<RawLayout> raw_layout;

  CodecId codec = CodecId::deflate;
  double e_abs = 0.0;
  int class_count = 3;
  std::optional<std::filesystem::path> background_path;
  std::optional<double> estimate_fraction;
  bool embed_background = false;

  // bench
  std::vector<CodecId> codecs;
  std::vector<double> error_bounds;

  /// Throws Error(invalid_argument) on out-of-range values.
  void validate() const;
};

struct BenchRecord {
  std::string dataset;
  std::string codec;
  double e_abs = 0.0;
  double cr = 0.0;
  double rel_improvement = 0.0;
  double compress_ms = 0.0;
  double decompress_ms = 0.0;
  double ssim = kUndefined;
  double spatial_reduction = kUndefined;
};

inline constexpr const char* kBenchCsvHeader =
    "dataset,codec,e_abs,cr,rel_improvement,compress_ms,decompress_ms,ssim,spatial_reduction";

/// Glob patterns expand to their sorted matches; plain paths pass through.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs);

ExitCode cmd_compress(const RunConfig& config, std::ostream& out, std::ostream& err);
ExitCode cmd_decompress(const RunConfig& config, std::ostream& out, std::ostream& err);
ExitCode cmd_segment(const RunConfig& config, std::ostream& out, std::ostream& err);
/// `a` is the prediction / original, `b` the ground truth / reconstruction.
ExitCode cmd_metrics(const std::filesystem::path& a, const std::filesystem::path& b, const RunConfig& config,
                     std::ostream& out, std::ostream& err);
ExitCode cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

std::vector<BenchRecord> run_bench(const RunConfig& config, std::ostream& err, bool& all_ok);
void write_bench(const std::vector<BenchRecord>& rows, ReportFormat format, std::ostream& out);

struct PhantomConfig {
  std::filesystem::path output_dir = ".";
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  int count = 1;
  int depth = 8;
  double background_noise = 0.0;
  double object_noise = 1.5;
  std::uint32_t seed = 1;
};
ExitCode cmd_phantom(const PhantomConfig& config, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal; "nan" for undefined values.
std::string format_number(double v);

}  // namespace roix::cli
