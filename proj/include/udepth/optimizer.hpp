#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udepth/icp.hpp"
#include "udepth/losses.hpp"
#include "udepth/multiscale.hpp"
#include "udepth/synthetic.hpp"

namespace udepth {

/// One frame pair and its decision variables.
struct PairProblem {
  ImageBuffer target;
  ImageBuffer source;
  Intrinsics intrinsics;
  /// Full-resolution disparity (1/m); coarser levels are derived by halving.
  Plane<double> disparity;
  RigidTransform pose;  // target -> source
  LossWeights weights;
  LossStrategy strategy = LossStrategy::kB;
  SsimParams ssim;
  bool two_d_level0_only = false;
  /// Target pixels excluded from the 2D losses.
  std::optional<Mask> target_mask;
  /// Source-frame depth for the 3D term; without it the term is skipped.
  std::optional<DepthMap> source_depth;
  IcpOptions icp;

  /// Throws std::invalid_argument on inconsistent sizes or a non-positive
  /// disparity.
  void validate() const;
};

struct Evaluation {
  LossBreakdown loss;
  Plane<double> d_disparity;  // full resolution
  Vector6d d_pose = Vector6d::Zero();
  bool loss3d_skipped = false;
  std::string loss3d_note;
};

/// Total loss and its gradient. The 2D gradients are exact; the 3D-term
/// gradient holds the ICP correction and the source cloud fixed.
Evaluation evaluate(const PairProblem& problem, bool with_gradient = true);

/// softplus and its inverse; disparity = softplus(theta).
double softplus(double x);
double softplus_inverse(double y);

enum class Schedule { kConstant, kCosine };

const char* to_string(Schedule s);
Schedule parse_schedule(const std::string& s);

struct OptimizerOptions {
  int steps = 500;
  /// Adam step sizes per parameter group.
  double pose_lr = 2e-3;
  double disparity_lr = 2e-4;
  Schedule schedule = Schedule::kCosine;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool optimize_disparity = true;
  bool optimize_pose = true;
  /// Abort once the total exceeds this multiple of the initial total.
  double divergence_factor = 10.0;
  /// Updates stop once the gradient norm over the optimized groups is at or
  /// below this; later trace entries repeat the stationary loss.
  double gradient_tolerance = 1e-10;

  bool valid() const;
};

struct OptimizeResult {
  Plane<double> disparity;
  RigidTransform pose;
  /// Loss before every step and after the last one (steps + 1 entries,
  /// fewer on divergence).
  std::vector<LossBreakdown> trace;
  bool diverged = false;
  int stationary_step = -1;  // first step whose gradient was within tolerance
  std::string message;
};

OptimizeResult optimize_pair(const PairProblem& problem, const OptimizerOptions& options);

/// Problem on a synthetic pair: ground-truth disparity, the scene's
/// occlusion mask and source depth, pose set to `init`.
PairProblem problem_from_scene(const SyntheticScene& scene, const RigidTransform& init,
                               const LossWeights& weights = {});

/// `gt` with its rotation perturbed by `rotation_deg` about a fixed oblique
/// axis and its translation moved by `translation_frac * |t|`.
RigidTransform perturb_pose(const RigidTransform& gt, double rotation_deg, double translation_frac);

/// Angle of R(a)^T R(b) in degrees.
double rotation_error_deg(const RigidTransform& a, const RigidTransform& b);
/// |t_est - t_gt| / |t_gt| (absolute error when t_gt is zero).
double translation_rel_error(const RigidTransform& est, const RigidTransform& gt);

/// CSV with columns step, reconstr, ssim, smooth0..3, loss3d0..3, total.
std::string trace_csv(const std::vector<LossBreakdown>& trace);

}  // namespace udepth
