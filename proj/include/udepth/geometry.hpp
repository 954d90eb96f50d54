#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "udepth/image.hpp"

namespace udepth {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Pinhole intrinsics in pixels; pixel centers sit at integer coordinates.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  bool valid() const { return fx > 0 && fy > 0 && std::isfinite(cx) && std::isfinite(cy); }

  Eigen::Matrix3d matrix() const;

  /// Intrinsics for an image resized by (sx, sy) under the pixel-center
  /// convention: c' = (c + 0.5) * s - 0.5.
  Intrinsics scaled(double sx, double sy) const;

  /// TUM RGB-D freiburg3 (640x480, already rectified).
  static Intrinsics tum_freiburg3();
};

/// Reads "key=value" lines (fx, fy, cx, cy; '#' comments). Throws DataError.
Intrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path, const Intrinsics& k);

/// Rodrigues' formula. Generic in the scalar so that it can be evaluated on
/// automatic-differentiation types.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> axis_angle_to_matrix(const Eigen::Matrix<Scalar, 3, 1>& r) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar theta2 = r.squaredNorm();
  Eigen::Matrix<Scalar, 3, 3> k;
  k << Scalar(0), -r.z(), r.y(),
       r.z(), Scalar(0), -r.x(),
       -r.y(), r.x(), Scalar(0);
  const Eigen::Matrix<Scalar, 3, 3> eye = Eigen::Matrix<Scalar, 3, 3>::Identity();
  if (theta2 < Scalar(1e-16)) {
    // Second-order series; exact to rounding below theta = 1e-8.
    return eye + k + Scalar(0.5) * k * k;
  }
  const Scalar theta = sqrt(theta2);
  return eye + (sin(theta) / theta) * k + ((Scalar(1) - cos(theta)) / theta2) * k * k;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rotation matrix back to angle-axis with angle in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation);

/// Right Jacobian of SO(3) at r, so that d(R(r) v)/dr = -R(r) [v]x Jr(r).
Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& r);

/// Rigid motion p' = R(rotation) p + translation, mapping target-frame
/// coordinates into the source frame.
struct RigidTransform {
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_params(const Vector6d& params);
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  Vector6d params() const;
  Eigen::Matrix3d rotation_matrix() const { return axis_angle_to_matrix<double>(rotation); }
  Eigen::Matrix4d matrix() const;
  RigidTransform inverse() const;
  /// (*this) after `rhs`: x -> this(rhs(x)).
  RigidTransform compose(const RigidTransform& rhs) const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;
  double angle() const { return rotation.norm(); }
};

/// 3 x N metric points; source_pixel holds the row-major pixel index a point
/// came from, when it came from an image.
struct PointCloud {
  Eigen::Matrix3Xd points;
  std::vector<int> source_pixel;

  Eigen::Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
};

/// Ray K^-1 [x y 1]^T through a pixel (z = 1).
inline Eigen::Vector3d pixel_ray(const Intrinsics& k, double x, double y) {
  return {(x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0};
}

/// One point per valid pixel, point z equal to the depth value.
PointCloud backproject(const DepthMap& depth, const Intrinsics& k);

struct Projection {
  double u = 0;
  double v = 0;
  double z = 0;
  bool valid = false;  // z > 0
};

std::vector<Projection> project(const PointCloud& cloud, const Intrinsics& k);

/// Per-pixel continuous target coordinates in the second view plus the depth
/// of the moved point. valid = source depth valid, projected depth > 0 and
/// the coordinate inside [0, W-1] x [0, H-1].
struct FlowField {
  Plane<double> u;
  Plane<double> v;
  Plane<double> depth;
  Mask valid;

  int width() const { return static_cast<int>(u.cols()); }
  int height() const { return static_cast<int>(u.rows()); }
};

/// Coordinates of each target pixel seen from the second camera:
/// K (R D K^-1 p + t). The image bounds used for the in-bounds test default
/// to the depth map's own size.
FlowField warp_coords(const DepthMap& depth, const RigidTransform& pose, const Intrinsics& k,
                      std::optional<std::pair<int, int>> bounds = std::nullopt);

/// Maps a flow field back through pose^-1: each warped coordinate is lifted
/// with its projected depth, moved by the inverse motion and projected.
FlowField inverse_warp_coords(const FlowField& flow, const RigidTransform& pose,
                              const Intrinsics& k);

/// Derivatives of the warped coordinate of one pixel.
struct WarpJacobian {
  Eigen::Vector2d d_depth;                 // d(u,v)/d(depth)
  Eigen::Matrix<double, 2, 6> d_pose;      // d(u,v)/d(rotation, translation)
};

/// Projection Jacobian d(u,v)/d(X) for a point in front of the camera.
Eigen::Matrix<double, 2, 3> projection_jacobian(const Eigen::Vector3d& point, const Intrinsics& k);

/// d(R(r) X + t)/d(r, t) evaluated at X (before motion).
Eigen::Matrix<double, 3, 6> motion_jacobian(const Eigen::Matrix3d& rotation,
                                            const Eigen::Matrix3d& right_jacobian,
                                            const Eigen::Vector3d& point);

/// Analytic warp Jacobian of pixel (x, y) with the given depth.
WarpJacobian warp_jacobian(double x, double y, double depth, const RigidTransform& pose,
                           const Intrinsics& k);

}  // namespace udepth
