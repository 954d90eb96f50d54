#include "udepth/optimizer.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace udepth {

void PairProblem::validate() const {
  if (target.empty() || !target.same_shape(source))
    throw std::invalid_argument("pair problem: target and source must be non-empty and equal in shape");
  check_pyramid_size(target.width(), target.height());
  if (disparity.cols() != target.width() || disparity.rows() != target.height())
    throw std::invalid_argument("pair problem: disparity size does not match the images");
  if (!disparity.allFinite() || (disparity.array() <= 0).any())
    throw std::invalid_argument("pair problem: disparity must be finite and positive");
  if (!intrinsics.valid()) throw std::invalid_argument("pair problem: invalid intrinsics");
  if (!weights.valid()) throw std::invalid_argument("pair problem: invalid loss weights");
  if (!ssim.valid()) throw std::invalid_argument("pair problem: invalid SSIM parameters");
  if (target_mask && (target_mask->cols() != target.width() || target_mask->rows() != target.height()))
    throw std::invalid_argument("pair problem: target mask size does not match the images");
  if (source_depth && (source_depth->width() != source.width() || source_depth->height() != source.height()))
    throw std::invalid_argument("pair problem: source depth size does not match the images");
}

Evaluation evaluate(const PairProblem& p, bool with_gradient) {
  p.validate();
  const int w = p.target.width();
  const int h = p.target.height();
  const LossWeights& wt = p.weights;
  const auto disp = build_pyramid(p.disparity);
  const auto images = build_pyramid(p.target);

  MultiscaleOptions ms;
  ms.strategy = p.strategy;
  ms.ssim = p.ssim;
  ms.two_d_level0_only = p.two_d_level0_only;
  ms.alpha = wt.alpha;
  ms.beta = wt.beta;
  MultiscaleGradient ms_grad;
  const MultiscaleResult photo =
      multiscale_losses(p.target, p.source, disp, p.pose, p.intrinsics, ms,
                        p.target_mask ? &*p.target_mask : nullptr, with_gradient ? &ms_grad : nullptr);

  Evaluation out;
  LossBreakdown parts;
  parts.reconstr = photo.reconstr;
  parts.ssim = photo.ssim;
  for (int s = 0; s < kPyramidLevels; ++s) {
    parts.reconstr_per_scale[s] = photo.levels[s].reconstr;
    parts.ssim_per_scale[s] = photo.levels[s].ssim;
    parts.smooth_per_scale[s] = smoothness_loss(disp[s], images[s]);
  }

  std::array<Plane<double>, kPyramidLevels> g;
  if (with_gradient) {
    out.d_pose = ms_grad.d_pose;
    for (int s = 0; s < kPyramidLevels; ++s)
      g[s] = ms_grad.d_disparity[s] + wt.gamma * smoothness_loss_grad(disp[s], images[s]);
  }

  if (wt.omega == 0) {
    out.loss3d_note = "disabled";
  } else if (!p.source_depth) {
    out.loss3d_skipped = true;
    out.loss3d_note = "no source depth";
  } else {
    const auto source_pyr = build_depth_pyramid(*p.source_depth);
    for (int s = 0; s < kPyramidLevels; ++s) {
      const Intrinsics ks = level_intrinsics(p.intrinsics, w, h, s);
      const DepthMap depth = invert(DepthMap::from_values(disp[s]));
      Loss3dGradient g3;
      const Loss3dResult r = per_scale_3d_loss(depth, source_pyr[s], p.pose, ks, p.icp,
                                               with_gradient ? &g3 : nullptr);
      parts.loss3d_per_scale[s] = r.value;
      if (r.skipped) {
        out.loss3d_skipped = true;
        out.loss3d_note += "level " + std::to_string(s) + ": " + r.reason + "; ";
        continue;
      }
      if (with_gradient) {
        // d(depth)/d(disparity) = -depth^2
        g[s] += wt.omega * (-(depth.values.array().square()) * g3.d_depth.array()).matrix();
        out.d_pose += wt.omega * g3.d_pose;
      }
    }
  }
  out.loss = total_loss(parts, wt);
  if (!with_gradient) return out;

  for (int s = kPyramidLevels - 1; s > 0; --s) {
    const ResizeOperator down(w >> (s - 1), h >> (s - 1), w >> s, h >> s);
    g[s - 1] += down.adjoint(g[s]);
  }
  out.d_disparity = std::move(g[0]);
  return out;
}

double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

double softplus_inverse(double y) {
  if (!(y > 0)) throw std::invalid_argument("softplus_inverse: argument must be positive");
  return y > 30 ? y : std::log(std::expm1(y));
}

const char* to_string(Schedule s) { return s == Schedule::kCosine ? "cosine" : "constant"; }

Schedule parse_schedule(const std::string& s) {
  if (s == "cosine") return Schedule::kCosine;
  if (s == "constant") return Schedule::kConstant;
  throw std::invalid_argument("unknown schedule '" + s + "' (expected cosine or constant)");
}

bool OptimizerOptions::valid() const {
  return steps >= 1 && pose_lr >= 0 && disparity_lr >= 0 && beta1 >= 0 && beta1 < 1 &&
         beta2 >= 0 && beta2 < 1 && epsilon > 0 && divergence_factor > 1 &&
         gradient_tolerance >= 0;
}

OptimizeResult optimize_pair(const PairProblem& problem, const OptimizerOptions& options) {
  if (!options.valid()) throw std::invalid_argument("optimize_pair: invalid optimizer options");
  problem.validate();
  PairProblem p = problem;
  const Eigen::Index n = p.disparity.size();

  Eigen::ArrayXd theta(n);
  for (Eigen::Index i = 0; i < n; ++i) theta(i) = softplus_inverse(p.disparity.data()[i]);
  Vector6d pose = p.pose.params();

  Eigen::ArrayXd m_theta = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd v_theta = Eigen::ArrayXd::Zero(n);
  Vector6d m_pose = Vector6d::Zero();
  Vector6d v_pose = Vector6d::Zero();

  OptimizeResult result;
  double initial = 0;
  for (int step = 0; step <= options.steps; ++step) {
    const bool last = step == options.steps;
    const Evaluation e = evaluate(p, !last);
    result.trace.push_back(e.loss);
    if (step == 0) initial = e.loss.total;
    if (!std::isfinite(e.loss.total) || e.loss.total > options.divergence_factor * std::max(initial, 1e-8)) {
      result.diverged = true;
      std::ostringstream msg;
      msg << "diverged at step " << step << ": total " << e.loss.total << " vs initial " << initial;
      result.message = msg.str();
      break;
    }
    if (last) break;

    double grad_norm2 = 0;
    if (options.optimize_pose) grad_norm2 += e.d_pose.squaredNorm();
    if (options.optimize_disparity) grad_norm2 += e.d_disparity.squaredNorm();
    if (std::sqrt(grad_norm2) <= options.gradient_tolerance) {
      result.stationary_step = step;
      std::ostringstream msg;
      msg << "stationary at step " << step << ": gradient norm " << std::sqrt(grad_norm2);
      result.message = msg.str();
      for (int rest = step + 1; rest <= options.steps; ++rest) result.trace.push_back(e.loss);
      break;
    }

    double scale = 1.0;
    if (options.schedule == Schedule::kCosine)
      scale = 0.5 * (1.0 + std::cos(std::numbers::pi * step / options.steps));
    const double t = step + 1;
    const double bc1 = 1.0 - std::pow(options.beta1, t);
    const double bc2 = 1.0 - std::pow(options.beta2, t);

    if (options.optimize_pose) {
      const Vector6d g = e.d_pose;
      m_pose = options.beta1 * m_pose + (1 - options.beta1) * g;
      v_pose = options.beta2 * v_pose + (1 - options.beta2) * g.cwiseProduct(g);
      const Vector6d mh = m_pose / bc1;
      const Vector6d vh = v_pose / bc2;
      pose -= (options.pose_lr * scale * mh.array() / (vh.array().sqrt() + options.epsilon)).matrix();
      p.pose = RigidTransform::from_params(pose);
    }
    if (options.optimize_disparity) {
      const Eigen::Map<const Eigen::ArrayXd> gd(e.d_disparity.data(), n);
      Eigen::ArrayXd sig(n);
      for (Eigen::Index i = 0; i < n; ++i) sig(i) = 1.0 / (1.0 + std::exp(-theta(i)));
      const Eigen::ArrayXd g = gd * sig;
      m_theta = options.beta1 * m_theta + (1 - options.beta1) * g;
      v_theta = options.beta2 * v_theta + (1 - options.beta2) * g.square();
      theta -= options.disparity_lr * scale * (m_theta / bc1) / ((v_theta / bc2).sqrt() + options.epsilon);
      for (Eigen::Index i = 0; i < n; ++i) p.disparity.data()[i] = softplus(theta(i));
    }
  }
  result.disparity = p.disparity;
  result.pose = p.pose;
  return result;
}

PairProblem problem_from_scene(const SyntheticScene& scene, const RigidTransform& init,
                               const LossWeights& weights) {
  PairProblem p;
  p.target = scene.target;
  p.source = scene.source;
  p.intrinsics = scene.intrinsics;
  p.disparity = scene.gt_disparity.values;
  p.pose = init;
  p.weights = weights;
  p.target_mask = scene.target_mask;
  p.source_depth = scene.source_depth;
  return p;
}

RigidTransform perturb_pose(const RigidTransform& gt, double rotation_deg, double translation_frac) {
  const Eigen::Vector3d axis = Eigen::Vector3d(1, -2, 1).normalized();
  const Eigen::Vector3d dir = Eigen::Vector3d(-1, 1, 2).normalized();
  RigidTransform out;
  const Eigen::Matrix3d delta = axis_angle_to_matrix<double>(axis * rotation_deg * std::numbers::pi / 180.0);
  out.rotation = matrix_to_axis_angle(gt.rotation_matrix() * delta);
  out.translation = gt.translation + translation_frac * gt.translation.norm() * dir;
  return out;
}

double rotation_error_deg(const RigidTransform& a, const RigidTransform& b) {
  const Eigen::Matrix3d rel = a.rotation_matrix().transpose() * b.rotation_matrix();
  return matrix_to_axis_angle(rel).norm() * 180.0 / std::numbers::pi;
}

double translation_rel_error(const RigidTransform& est, const RigidTransform& gt) {
  const double err = (est.translation - gt.translation).norm();
  const double ref = gt.translation.norm();
  return ref > 0 ? err / ref : err;
}

std::string trace_csv(const std::vector<LossBreakdown>& trace) {
  std::ostringstream os;
  os << "step,reconstr,ssim";
  for (int s = 0; s < kPyramidLevels; ++s) os << ",smooth" << s;
  for (int s = 0; s < kPyramidLevels; ++s) os << ",loss3d" << s;
  os << ",total\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& l = trace[i];
    os << i << ',' << l.reconstr << ',' << l.ssim;
    for (double v : l.smooth_per_scale) os << ',' << v;
    for (double v : l.loss3d_per_scale) os << ',' << v;
    os << ',' << l.total << '\n';
  }
  return os.str();
}

}  // namespace udepth
