#include "udepth/multiscale.hpp"

#include <stdexcept>
#include <string>

namespace udepth {

const char* to_string(LossStrategy s) { return s == LossStrategy::kA ? "A" : "B"; }

LossStrategy parse_strategy(const std::string& s) {
  if (s == "A" || s == "a") return LossStrategy::kA;
  if (s == "B" || s == "b") return LossStrategy::kB;
  throw std::invalid_argument("unknown loss strategy '" + s + "' (expected A or B)");
}

PhotometricTerms photometric_terms(const ImageBuffer& target, const ImageBuffer& source,
                                   const Plane<double>& disparity, const RigidTransform& pose,
                                   const Intrinsics& k, const SsimParams& ssim,
                                   const Mask* target_mask, PhotometricGradient* grad,
                                   double alpha, double beta) {
  const int w = target.width();
  const int h = target.height();
  if (!target.same_shape(source))
    throw std::invalid_argument("photometric_terms: target and source shapes differ");
  if (disparity.cols() != w || disparity.rows() != h)
    throw std::invalid_argument("photometric_terms: disparity size does not match the image");
  if (target_mask && (target_mask->rows() != h || target_mask->cols() != w))
    throw std::invalid_argument("photometric_terms: target mask size mismatch");

  const DepthMap depth = invert(DepthMap::from_values(disparity));
  PhotometricTerms terms;
  terms.flow = warp_coords(depth, pose, k, std::make_pair(source.width(), source.height()));
  terms.warped = bilinear_sample(source, terms.flow);
  if (target_mask) {
    terms.warped.mask = terms.warped.mask && *target_mask;
    for (int c = 0; c < terms.warped.image.channels(); ++c)
      terms.warped.image.plane(c) =
          terms.warped.mask.select(terms.warped.image.plane(c).array(), 0.0).matrix();
  }
  const ScalarLoss rec = reconstruction_loss(target, terms.warped);
  const ScalarLoss sim = ssim_loss(target, terms.warped, ssim);
  terms.reconstr = rec.value;
  terms.ssim = sim.value;
  terms.empty_mask = rec.empty_mask;
  if (!grad) return terms;

  // dL/d(warped) per channel.
  std::vector<Plane<double>> d_warped = reconstruction_loss_grad(target, terms.warped);
  const std::vector<Plane<double>> d_ssim = ssim_loss_grad(target, terms.warped, ssim);
  for (std::size_t c = 0; c < d_warped.size(); ++c) d_warped[c] = alpha * d_warped[c] + beta * d_ssim[c];

  const SampleJacobian jac = bilinear_sample_jacobian(source, terms.flow);
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  const Eigen::Matrix3d jr = so3_right_jacobian(pose.rotation);
  grad->d_disparity = Plane<double>::Zero(h, w);
  grad->d_pose.setZero();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!terms.warped.mask(y, x)) continue;
      Eigen::Vector2d g_uv = Eigen::Vector2d::Zero();
      for (int c = 0; c < source.channels(); ++c) {
        g_uv.x() += d_warped[c](y, x) * jac.d_u[c](y, x);
        g_uv.y() += d_warped[c](y, x) * jac.d_v[c](y, x);
      }
      if (g_uv.isZero(0.0)) continue;
      const double z = depth.values(y, x);
      const Eigen::Vector3d ray = pixel_ray(k, x, y);
      const Eigen::Vector3d point = z * ray;
      const Eigen::Matrix<double, 2, 3> jp = projection_jacobian(rot * point + pose.translation, k);
      const Eigen::RowVector3d g_moved = g_uv.transpose() * jp;
      // depth = 1/d, so d(depth)/d(d) = -depth^2.
      grad->d_disparity(y, x) = -(z * z) * g_moved.dot(rot * ray);
      grad->d_pose += (g_moved * motion_jacobian(rot, jr, point)).transpose();
    }
  }
  return terms;
}

std::array<Mask, kPyramidLevels> build_mask_pyramid(const Mask& mask) {
  std::array<Mask, kPyramidLevels> levels;
  levels[0] = mask;
  for (int k = 1; k < kPyramidLevels; ++k) {
    const Mask& prev = levels[k - 1];
    const Eigen::Index h = prev.rows() / 2;
    const Eigen::Index w = prev.cols() / 2;
    Mask m(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x)
        m(y, x) = prev(2 * y, 2 * x) && prev(2 * y, 2 * x + 1) && prev(2 * y + 1, 2 * x) &&
                  prev(2 * y + 1, 2 * x + 1);
    levels[k] = std::move(m);
  }
  return levels;
}

Intrinsics level_intrinsics(const Intrinsics& k, int width, int height, int level) {
  if (level == 0) return k;
  const int lw = width >> level;
  const int lh = height >> level;
  return k.scaled(static_cast<double>(lw) / width, static_cast<double>(lh) / height);
}

MultiscaleResult multiscale_losses(const ImageBuffer& target, const ImageBuffer& source,
                                   const std::array<Plane<double>, kPyramidLevels>& disparities,
                                   const RigidTransform& pose, const Intrinsics& k,
                                   const MultiscaleOptions& options, const Mask* target_mask,
                                   MultiscaleGradient* grad) {
  const int w = target.width();
  const int h = target.height();
  check_pyramid_size(w, h);
  for (int s = 0; s < kPyramidLevels; ++s) {
    if (disparities[s].cols() != (w >> s) || disparities[s].rows() != (h >> s)) {
      throw std::invalid_argument("multiscale_losses: disparity level " + std::to_string(s) +
                                  " is " + std::to_string(disparities[s].cols()) + "x" +
                                  std::to_string(disparities[s].rows()) + ", expected " +
                                  std::to_string(w >> s) + "x" + std::to_string(h >> s));
    }
  }

  std::array<ImageBuffer, kPyramidLevels> target_pyr;
  std::array<ImageBuffer, kPyramidLevels> source_pyr;
  std::array<Mask, kPyramidLevels> mask_pyr;
  if (options.strategy == LossStrategy::kA) {
    target_pyr = build_pyramid(target);
    source_pyr = build_pyramid(source);
    if (target_mask) mask_pyr = build_mask_pyramid(*target_mask);
  }

  MultiscaleResult result;
  if (grad) grad->d_pose.setZero();
  const int active_levels = options.two_d_level0_only ? 1 : kPyramidLevels;
  for (int s = 0; s < kPyramidLevels; ++s) {
    LevelTerms& level = result.levels[s];
    PhotometricGradient level_grad;
    PhotometricGradient* level_grad_ptr = (grad && s < active_levels) ? &level_grad : nullptr;
    PhotometricTerms terms;
    if (options.strategy == LossStrategy::kA) {
      const Intrinsics ks = level_intrinsics(k, w, h, s);
      terms = photometric_terms(target_pyr[s], source_pyr[s], disparities[s], pose, ks,
                                options.ssim, target_mask ? &mask_pyr[s] : nullptr,
                                level_grad_ptr, options.alpha, options.beta);
      if (grad) {
        grad->d_disparity[s] = level_grad_ptr ? level_grad.d_disparity
                                              : Plane<double>::Zero(h >> s, w >> s);
      }
    } else {
      const ResizeOperator up(w >> s, h >> s, w, h);
      const Plane<double> upsampled = s == 0 ? disparities[s] : up.apply(disparities[s]);
      terms = photometric_terms(target, source, upsampled, pose, k, options.ssim, target_mask,
                                level_grad_ptr, options.alpha, options.beta);
      if (grad) {
        if (!level_grad_ptr) grad->d_disparity[s] = Plane<double>::Zero(h >> s, w >> s);
        else grad->d_disparity[s] = s == 0 ? level_grad.d_disparity : up.adjoint(level_grad.d_disparity);
      }
    }
    if (level_grad_ptr) grad->d_pose += level_grad.d_pose;
    level.reconstr = terms.reconstr;
    level.ssim = terms.ssim;
    level.empty_mask = terms.empty_mask;
    level.width = terms.warped.image.width();
    level.height = terms.warped.image.height();
    level.warped = std::move(terms.warped);
    if (s < active_levels) {
      result.reconstr += level.reconstr;
      result.ssim += level.ssim;
    }
  }
  return result;
}

}  // namespace udepth
