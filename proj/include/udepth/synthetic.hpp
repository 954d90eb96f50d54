#pragma once

#include <cstdint>
#include <string>

#include "udepth/geometry.hpp"
#include "udepth/image.hpp"

namespace udepth {

enum class DepthProfile { kPlane, kSlant, kSteps };

const char* to_string(DepthProfile p);
DepthProfile parse_profile(const std::string& s);

/// Default pinhole for a synthetic frame: fx = fy = 0.9 W, principal point
/// at the image center.
Intrinsics synthetic_intrinsics(int width, int height);

struct SyntheticOptions {
  int width = 64;
  int height = 48;
  int channels = 3;
  DepthProfile profile = DepthProfile::kSlant;
  RigidTransform motion;
  /// Depth of the plane (or the mean depth of the other profiles), meters.
  double base_depth = 2.0;
  double min_in_bounds = 0.8;
};

/// A frame pair with known geometry. The source view is a smoothed noise
/// texture; the target view is rendered by bilinearly sampling the source at
/// warp(gt_depth, gt_pose), so the pair is consistent to the last bit.
struct SyntheticScene {
  Intrinsics intrinsics;
  DisparityMap gt_disparity;  // target frame
  DepthMap gt_depth;          // 1 / gt_disparity
  DepthMap source_depth;      // source frame, analytic ray casting
  RigidTransform gt_pose;     // target -> source
  ImageBuffer texture;
  ImageBuffer target;
  ImageBuffer source;
  /// Target pixels that land inside the source and are not occluded there.
  Mask target_mask;
  double in_bounds_fraction = 1;
};

/// Deterministic in `seed`. Throws DataError when fewer than
/// `min_in_bounds` of the target pixels land inside the source.
SyntheticScene make_synthetic_scene(std::uint64_t seed, const SyntheticOptions& options);

/// Smoothed multi-octave uniform noise in [0.05, 0.95].
ImageBuffer noise_texture(std::uint64_t seed, int width, int height, int channels);

}  // namespace udepth
