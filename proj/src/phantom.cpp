#include "roix/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "roix/error.hpp"

namespace roix {

Phantom make_disk_phantom(const PhantomSpec& spec) {
  if (spec.width == 0 || spec.height == 0) throw Error(ErrorCode::invalid_argument, "phantom needs a non-empty raster");
  if (spec.edge_level <= spec.background_level || spec.center_level < spec.edge_level || spec.center_level > 255) {
    throw Error(ErrorCode::invalid_argument, "phantom levels must satisfy background < edge <= center <= 255");
  }
  const double gain = spec.depth == BitDepth::k8 ? 1.0 : 257.0;
  const double top = max_value(spec.depth);
  const double bg = spec.background_level * gain;

  std::mt19937 rng(spec.seed);
  std::normal_distribution<double> bg_noise(0.0, spec.background_noise > 0 ? spec.background_noise * gain : 1.0);
  std::normal_distribution<double> obj_noise(0.0, spec.object_noise > 0 ? spec.object_noise * gain : 1.0);

  const double cx = (spec.width - 1) / 2.0;
  const double cy = (spec.height - 1) / 2.0;
  const double r = spec.radius_fraction * spec.width;

  Phantom p{GrayImage(spec.width, spec.height, spec.depth),
            BackgroundModel{GrayImage(spec.width, spec.height, spec.depth, static_cast<std::uint16_t>(bg)),
                            BackgroundSource::reference_scan},
            BinaryMask(spec.width, spec.height)};
  for (std::uint32_t y = 0; y < spec.height; ++y) {
    for (std::uint32_t x = 0; x < spec.width; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      double v;
      if (d2 <= r * r) {
        p.truth.set(x, y);
        const double profile = 1.0 - d2 / (r * r);
        v = (spec.edge_level + (spec.center_level - spec.edge_level) * profile) * gain;
        if (spec.object_noise > 0) v += obj_noise(rng);
        v = std::clamp(std::round(v), bg + 1.0, top);
      } else {
        v = bg;
        if (spec.background_noise > 0) v = std::clamp(std::round(v + bg_noise(rng)), 0.0, top);
      }
      p.image.set(x, y, static_cast<std::uint16_t>(v));
    }
  }
  return p;
}

}  // namespace roix
