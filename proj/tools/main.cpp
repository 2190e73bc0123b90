#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "roix/error.hpp"

namespace {

using roix::cli::ExitCode;
using roix::cli::ReportFormat;
using roix::cli::RunConfig;

const std::map<std::string, ReportFormat> kReportFormats{{"json", ReportFormat::json}, {"csv", ReportFormat::csv}};
const std::map<std::string, roix::ImageFormat> kImageFormats{{"pgm", roix::ImageFormat::pgm},
                                                             {"raw", roix::ImageFormat::raw}};

struct RawArgs {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int depth = 8;
};

void add_io_options(CLI::App* cmd, RunConfig& cfg, RawArgs& raw) {
  cmd->add_option("inputs", cfg.inputs, "Input files or glob patterns")->required();
  cmd->add_option("-o,--output", cfg.output_dir, "Output directory");
  cmd->add_option("--report", cfg.report, "Report format")->transform(CLI::CheckedTransformer(kReportFormats));
  cmd->add_option("--report-out", cfg.report_path, "Write the report to this file instead of stdout");
  cmd->add_option("--workers", cfg.workers, "Files processed concurrently")->check(CLI::PositiveNumber);
  cmd->add_option("--format", cfg.image_format, "Image format")->transform(CLI::CheckedTransformer(kImageFormats));
  cmd->add_option("--width", raw.width, "Raw image width");
  cmd->add_option("--height", raw.height, "Raw image height");
  cmd->add_option("--depth", raw.depth, "Raw image bit depth")->check(CLI::IsMember({8, 16}));
}

void add_background_options(CLI::App* cmd, RunConfig& cfg) {
  auto* ref = cmd->add_option("--background", cfg.background_path, "Background reference image");
  auto* est = cmd->add_option("--estimate-background", cfg.estimate_fraction,
                              "Estimate a constant background from a border frame of this fraction");
  ref->excludes(est);
  cmd->add_flag("--embed-background", cfg.embed_background, "Store the reference background inside the archive");
}

void add_pipeline_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--classes", cfg.class_count, "Multi-Otsu class count")->check(CLI::Range(2, 255));
  cmd->add_option("--error-bound", cfg.e_abs, "Absolute error bound in 8-bit intensity units")
      ->check(CLI::NonNegativeNumber);
}

void finish_raw(RunConfig& cfg, const RawArgs& raw) {
  if (cfg.image_format == roix::ImageFormat::raw) {
    cfg.raw_layout = roix::RawLayout{raw.width, raw.height, raw.depth == 16 ? roix::BitDepth::k16 : roix::BitDepth::k8};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ROI-aware error-bounded compression for grayscale projections"};
  app.require_subcommand(1);

  RunConfig cfg;
  RawArgs raw;
  std::string codec = "gzip";
  std::vector<std::string> codecs;

  auto* compress = app.add_subcommand("compress", "Compress images into .roix archives");
  add_io_options(compress, cfg, raw);
  add_background_options(compress, cfg);
  add_pipeline_options(compress, cfg);
  compress->add_option("--codec", codec, "Pixel codec")->check(CLI::IsMember({"store", "gzip", "zstd"}));

  auto* decompress = app.add_subcommand("decompress", "Reconstruct images from .roix archives");
  add_io_options(decompress, cfg, raw);
  decompress->add_option("--background", cfg.background_path, "Background for archives that carry none");

  auto* segment = app.add_subcommand("segment", "Write the ROI mask of each image");
  add_io_options(segment, cfg, raw);
  add_background_options(segment, cfg);
  segment->add_option("--classes", cfg.class_count, "Multi-Otsu class count")->check(CLI::Range(2, 255));

  std::string metric_a;
  std::string metric_b;
  auto* metrics = app.add_subcommand("metrics", "Compare a prediction/original with a truth/reconstruction");
  metrics->add_option("a", metric_a, "Predicted mask or original image")->required();
  metrics->add_option("b", metric_b, "Ground-truth mask or reconstructed image")->required();
  metrics->add_option("--report", cfg.report, "Report format")->transform(CLI::CheckedTransformer(kReportFormats));
  metrics->add_option("--report-out", cfg.report_path, "Write the report to this file instead of stdout");
  metrics->add_option("--format", cfg.image_format, "Image format")->transform(CLI::CheckedTransformer(kImageFormats));
  metrics->add_option("--width", raw.width, "Raw image width");
  metrics->add_option("--height", raw.height, "Raw image height");
  metrics->add_option("--depth", raw.depth, "Raw image bit depth")->check(CLI::IsMember({8, 16}));

  auto* bench = app.add_subcommand("bench", "Sweep codecs and error bounds, one row per cell");
  bench->add_option("inputs", cfg.inputs, "Input files or glob patterns");
  bench->add_option("--report", cfg.report, "Report format")->transform(CLI::CheckedTransformer(kReportFormats));
  bench->add_option("--report-out", cfg.report_path, "Write the report to this file instead of stdout");
  bench->add_option("--workers", cfg.workers, "Files processed concurrently")->check(CLI::PositiveNumber);
  bench->add_option("--format", cfg.image_format, "Image format")->transform(CLI::CheckedTransformer(kImageFormats));
  bench->add_option("--width", raw.width, "Raw image width");
  bench->add_option("--height", raw.height, "Raw image height");
  bench->add_option("--depth", raw.depth, "Raw image bit depth")->check(CLI::IsMember({8, 16}));
  bench->add_option("--codecs", codecs, "Codecs to sweep")->delimiter(',')->check(CLI::IsMember({"store", "gzip", "zstd"}));
  bench->add_option("--error-bounds", cfg.error_bounds, "Error bounds to sweep")->delimiter(',');
  add_background_options(bench, cfg);
  bench->add_option("--classes", cfg.class_count, "Multi-Otsu class count")->check(CLI::Range(2, 255));

  roix::cli::PhantomConfig phantom_cfg;
  auto* phantom = app.add_subcommand("phantom", "Write synthetic disk phantoms, truth masks and a background");
  phantom->add_option("-o,--output", phantom_cfg.output_dir, "Output directory");
  phantom->add_option("--width", phantom_cfg.width, "Width");
  phantom->add_option("--height", phantom_cfg.height, "Height");
  phantom->add_option("--count", phantom_cfg.count, "Number of phantoms");
  phantom->add_option("--depth", phantom_cfg.depth, "Bit depth")->check(CLI::IsMember({8, 16}));
  phantom->add_option("--background-noise", phantom_cfg.background_noise, "Gaussian sigma off the disk");
  phantom->add_option("--object-noise", phantom_cfg.object_noise, "Gaussian sigma on the disk");
  phantom->add_option("--seed", phantom_cfg.seed, "Seed of the first phantom");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    finish_raw(cfg, raw);
    cfg.codec = roix::parse_codec(codec);
    for (const auto& c : codecs) cfg.codecs.push_back(roix::parse_codec(c));
    ExitCode rc = ExitCode::success;
    if (*compress) rc = roix::cli::cmd_compress(cfg, std::cout, std::cerr);
    else if (*decompress) rc = roix::cli::cmd_decompress(cfg, std::cout, std::cerr);
    else if (*segment) rc = roix::cli::cmd_segment(cfg, std::cout, std::cerr);
    else if (*metrics) rc = roix::cli::cmd_metrics(metric_a, metric_b, cfg, std::cout, std::cerr);
    else if (*bench) rc = roix::cli::cmd_bench(cfg, std::cout, std::cerr);
    else if (*phantom) rc = roix::cli::cmd_phantom(phantom_cfg, std::cout, std::cerr);
    return static_cast<int>(rc);
  } catch (const roix::Error& e) {
    std::cerr << "roix: " << e.what() << '\n';
    return static_cast<int>(e.code() == roix::ErrorCode::invalid_argument ? ExitCode::usage
                                                                           : ExitCode::partial_failure);
  }
}
