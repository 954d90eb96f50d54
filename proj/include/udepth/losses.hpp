#pragma once

#include <array>
#include <vector>

#include "udepth/image.hpp"
#include "udepth/sampler.hpp"

namespace udepth {

/// SSIM stabilizers for unit-range intensities and the odd window side.
struct SsimParams {
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
  int window = 3;

  bool valid() const { return c1 > 0 && c2 > 0 && window >= 3 && window % 2 == 1; }
};

/// Weights of the final objective: alpha * reconstruction + beta * SSIM
/// + sum over scales of (gamma * smoothness + omega * 3D).
struct LossWeights {
  double alpha = 0.85;
  double beta = 0.15;
  double gamma = 0.15;
  double omega = 0.1;

  bool valid() const;
  LossWeights scaled(double s) const { return {alpha * s, beta * s, gamma * s, omega * s}; }
};

struct LossBreakdown {
  double reconstr = 0;
  double ssim = 0;
  std::array<double, kPyramidLevels> smooth_per_scale{};
  std::array<double, kPyramidLevels> loss3d_per_scale{};
  double total = 0;

  // Per-level 2D terms that were summed into reconstr / ssim.
  std::array<double, kPyramidLevels> reconstr_per_scale{};
  std::array<double, kPyramidLevels> ssim_per_scale{};
};

/// Fills `total` from the parts.
LossBreakdown total_loss(LossBreakdown parts, const LossWeights& weights);

/// A summed loss; `empty_mask` is set when no pixel contributed.
struct ScalarLoss {
  double value = 0;
  bool empty_mask = false;
};

/// Kink-aware sign: |x| <= kSubgradientDeadZone counts as the kink itself.
constexpr double kSubgradientDeadZone = 1e-12;
inline double subgradient_sign(double x) {
  if (x > kSubgradientDeadZone) return 1.0;
  if (x < -kSubgradientDeadZone) return -1.0;
  return 0.0;
}

/// Sum over valid pixels and channels of |target - warped|.
ScalarLoss reconstruction_loss(const ImageBuffer& target, const SampleResult& warped);

/// d(reconstruction_loss)/d(warped), one plane per channel.
std::vector<Plane<double>> reconstruction_loss_grad(const ImageBuffer& target,
                                                    const SampleResult& warped);

/// Per-pixel SSIM averaged over channels, from window-local population
/// statistics with edge-clamped windows.
Plane<double> ssim_map(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& params);

/// Pixels whose whole (edge-clamped) window is valid.
Mask erode_mask(const Mask& mask, int window);

/// Sum of (1 - SSIM) over pixels whose window is entirely valid.
ScalarLoss ssim_loss(const ImageBuffer& target, const SampleResult& warped, const SsimParams& params);

/// d(ssim_loss)/d(warped), one plane per channel.
std::vector<Plane<double>> ssim_loss_grad(const ImageBuffer& target, const SampleResult& warped,
                                          const SsimParams& params);

/// Edge-aware smoothness with forward differences:
///   sum |dD/dx| exp(-|dI/dx|) + |dD/dy| exp(-|dI/dy|),
/// |dI| averaged over channels. Differences touching an invalid disparity
/// pixel are skipped.
double smoothness_loss(const DisparityMap& disparity, const ImageBuffer& img);
double smoothness_loss(const Plane<double>& disparity, const ImageBuffer& img);

/// d(smoothness_loss)/d(disparity) for a dense disparity plane.
Plane<double> smoothness_loss_grad(const Plane<double>& disparity, const ImageBuffer& img);

}  // namespace udepth
