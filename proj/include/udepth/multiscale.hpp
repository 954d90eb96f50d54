#pragma once

#include <array>

#include "udepth/geometry.hpp"
#include "udepth/losses.hpp"
#include "udepth/sampler.hpp"

namespace udepth {

/// How coarse disparity levels meet the images.
///  A: target and source are resized down to each level; warp at the level.
///  B: each disparity level is upsampled to the input size; warp at full size.
enum class LossStrategy { kA, kB };

const char* to_string(LossStrategy s);
LossStrategy parse_strategy(const std::string& s);

/// Gradient of alpha * reconstruction + beta * SSIM for one warp.
struct PhotometricGradient {
  Plane<double> d_disparity;
  Vector6d d_pose = Vector6d::Zero();
};

struct PhotometricTerms {
  double reconstr = 0;
  double ssim = 0;
  bool empty_mask = false;
  FlowField flow;
  SampleResult warped;
};

/// Warps `source` into the target grid with depth 1/disparity and evaluates
/// the reconstruction and SSIM losses against `target`. `target_mask`, when
/// given, removes target pixels (e.g. known disocclusions) from the losses.
/// With `grad` set, also returns the analytic gradient of
/// alpha * reconstr + beta * ssim.
PhotometricTerms photometric_terms(const ImageBuffer& target, const ImageBuffer& source,
                                   const Plane<double>& disparity, const RigidTransform& pose,
                                   const Intrinsics& k, const SsimParams& ssim,
                                   const Mask* target_mask = nullptr,
                                   PhotometricGradient* grad = nullptr, double alpha = 1.0,
                                   double beta = 1.0);

struct MultiscaleOptions {
  LossStrategy strategy = LossStrategy::kB;
  SsimParams ssim;
  /// Restrict reconstruction/SSIM to level 0 instead of summing all levels.
  bool two_d_level0_only = false;
  double alpha = 0.85;
  double beta = 0.15;
};

struct LevelTerms {
  double reconstr = 0;
  double ssim = 0;
  bool empty_mask = false;
  int width = 0;   // resolution the warp was evaluated at
  int height = 0;
  SampleResult warped;
};

struct MultiscaleResult {
  std::array<LevelTerms, kPyramidLevels> levels;
  /// Sums over the active levels.
  double reconstr = 0;
  double ssim = 0;
};

struct MultiscaleGradient {
  std::array<Plane<double>, kPyramidLevels> d_disparity;  // at each level's size
  Vector6d d_pose = Vector6d::Zero();
};

/// Per-level 2D losses for disparity levels matching the pyramid of the
/// target size. `k` belongs to the input resolution.
MultiscaleResult multiscale_losses(const ImageBuffer& target, const ImageBuffer& source,
                                   const std::array<Plane<double>, kPyramidLevels>& disparities,
                                   const RigidTransform& pose, const Intrinsics& k,
                                   const MultiscaleOptions& options,
                                   const Mask* target_mask = nullptr,
                                   MultiscaleGradient* grad = nullptr);

/// Chained halving of a mask: a coarse pixel is set when all children are.
std::array<Mask, kPyramidLevels> build_mask_pyramid(const Mask& mask);

/// Intrinsics of pyramid level `level` for an input of the given size.
Intrinsics level_intrinsics(const Intrinsics& k, int width, int height, int level);

}  // namespace udepth
