#pragma once

#include <cstdint>

#include "roix/image.hpp"
#include "roix/segmentation.hpp"

namespace roix {

/// Synthetic projection: a bright disk with a smooth radial profile on a dark
/// flat field. Levels are given on the 8-bit scale and multiplied by 257 for
/// depth-16 output.
struct PhantomSpec {
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  BitDepth depth = BitDepth::k8;
  double radius_fraction = 0.25;  // radius = radius_fraction * width
  std::uint16_t background_level = 20;
  double background_noise = 0.0;  // Gaussian sigma; 0 keeps the field exact
  std::uint16_t center_level = 230;
  std::uint16_t edge_level = 140;
  double object_noise = 1.5;
  std::uint32_t seed = 1;
};

struct Phantom {
  GrayImage image;
  /// Noise-free flat field at background_level.
  BackgroundModel background;
  /// Analytic disk membership.
  BinaryMask truth;
};

/// With background_noise == 0 every pixel off the disk equals the background
/// and every disk pixel is strictly above it.
Phantom make_disk_phantom(const PhantomSpec& spec);

}  // namespace roix
