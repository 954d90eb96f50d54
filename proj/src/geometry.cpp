#include "udepth/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "udepth/errors.hpp"

namespace udepth {

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d m;
  m << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return m;
}

Intrinsics Intrinsics::scaled(double sx, double sy) const {
  return {fx * sx, fy * sy, (cx + 0.5) * sx - 0.5, (cy + 0.5) * sy - 0.5};
}

Intrinsics Intrinsics::tum_freiburg3() { return {535.4, 539.2, 320.1, 247.6}; }

Intrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open intrinsics file " + path.string());
  std::map<std::string, double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
               line.end());
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      values[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  Intrinsics k;
  for (const char* key : {"fx", "fy", "cx", "cy"}) {
    if (!values.count(key)) throw DataError(path.string() + ": missing key '" + key + "'");
  }
  k.fx = values["fx"];
  k.fy = values["fy"];
  k.cx = values["cx"];
  k.cy = values["cy"];
  if (!k.valid()) throw DataError(path.string() + ": focal lengths must be positive");
  return k;
}

void save_intrinsics(const std::filesystem::path& path, const Intrinsics& k) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17) << "fx=" << k.fx << "\nfy=" << k.fy << "\ncx=" << k.cx
      << "\ncy=" << k.cy << "\n";
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& r) {
  const double theta2 = r.squaredNorm();
  const Eigen::Matrix3d k = skew(r);
  if (theta2 < 1e-10) {
    return Eigen::Matrix3d::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double theta = std::sqrt(theta2);
  return Eigen::Matrix3d::Identity() - ((1.0 - std::cos(theta)) / theta2) * k +
         ((theta - std::sin(theta)) / (theta2 * theta)) * k * k;
}

RigidTransform RigidTransform::from_params(const Vector6d& params) {
  return {params.head<3>(), params.tail<3>()};
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  return {matrix_to_axis_angle(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
}

Vector6d RigidTransform::params() const {
  Vector6d p;
  p << rotation, translation;
  return p;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation_matrix().transpose();
  return {-rotation, -(rt * translation)};
}

RigidTransform RigidTransform::compose(const RigidTransform& rhs) const {
  const Eigen::Matrix3d r = rotation_matrix();
  return {matrix_to_axis_angle(r * rhs.rotation_matrix()), r * rhs.translation + translation};
}

Eigen::Vector3d RigidTransform::apply(const Eigen::Vector3d& p) const {
  return rotation_matrix() * p + translation;
}

PointCloud backproject(const DepthMap& depth, const Intrinsics& k) {
  PointCloud cloud;
  cloud.points.resize(3, depth.valid_count());
  cloud.source_pixel.reserve(static_cast<std::size_t>(depth.valid_count()));
  Eigen::Index n = 0;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.mask(y, x)) continue;
      cloud.points.col(n++) = depth.values(y, x) * pixel_ray(k, x, y);
      cloud.source_pixel.push_back(y * depth.width() + x);
    }
  }
  return cloud;
}

std::vector<Projection> project(const PointCloud& cloud, const Intrinsics& k) {
  std::vector<Projection> out(static_cast<std::size_t>(cloud.size()));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.points.col(i);
    Projection& pr = out[static_cast<std::size_t>(i)];
    pr.z = p.z();
    if (!(p.z() > 0)) continue;
    pr.u = k.fx * p.x() / p.z() + k.cx;
    pr.v = k.fy * p.y() / p.z() + k.cy;
    pr.valid = true;
  }
  return out;
}

FlowField warp_coords(const DepthMap& depth, const RigidTransform& pose, const Intrinsics& k,
                      std::optional<std::pair<int, int>> bounds) {
  const int w = depth.width();
  const int h = depth.height();
  const auto [bw, bh] = bounds.value_or(std::make_pair(w, h));
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  const bool identity = pose.rotation.isZero(0.0) && pose.translation.isZero(0.0);
  FlowField flow{Plane<double>::Zero(h, w), Plane<double>::Zero(h, w), Plane<double>::Zero(h, w),
                 Mask::Constant(h, w, false)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.mask(y, x)) continue;
      const Eigen::Vector3d p = rot * (depth.values(y, x) * pixel_ray(k, x, y)) + pose.translation;
      flow.depth(y, x) = p.z();
      if (!(p.z() > 0)) continue;
      const double u = identity ? x : k.fx * p.x() / p.z() + k.cx;
      const double v = identity ? y : k.fy * p.y() / p.z() + k.cy;
      flow.u(y, x) = u;
      flow.v(y, x) = v;
      flow.valid(y, x) = u >= 0 && v >= 0 && u <= bw - 1 && v <= bh - 1;
    }
  }
  return flow;
}

FlowField inverse_warp_coords(const FlowField& flow, const RigidTransform& pose,
                              const Intrinsics& k) {
  const RigidTransform inv = pose.inverse();
  const Eigen::Matrix3d rot = inv.rotation_matrix();
  const int w = flow.width();
  const int h = flow.height();
  FlowField back{Plane<double>::Zero(h, w), Plane<double>::Zero(h, w), Plane<double>::Zero(h, w),
                 Mask::Constant(h, w, false)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!(flow.depth(y, x) > 0)) continue;
      const Eigen::Vector3d p =
          rot * (flow.depth(y, x) * pixel_ray(k, flow.u(y, x), flow.v(y, x))) + inv.translation;
      back.depth(y, x) = p.z();
      if (!(p.z() > 0)) continue;
      back.u(y, x) = k.fx * p.x() / p.z() + k.cx;
      back.v(y, x) = k.fy * p.y() / p.z() + k.cy;
      back.valid(y, x) = true;
    }
  }
  return back;
}

Eigen::Matrix<double, 2, 3> projection_jacobian(const Eigen::Vector3d& p, const Intrinsics& k) {
  const double iz = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> j;
  j << k.fx * iz, 0, -k.fx * p.x() * iz * iz,
       0, k.fy * iz, -k.fy * p.y() * iz * iz;
  return j;
}

Eigen::Matrix<double, 3, 6> motion_jacobian(const Eigen::Matrix3d& rotation,
                                            const Eigen::Matrix3d& right_jacobian,
                                            const Eigen::Vector3d& point) {
  Eigen::Matrix<double, 3, 6> j;
  j.leftCols<3>() = -rotation * skew(point) * right_jacobian;
  j.rightCols<3>().setIdentity();
  return j;
}

WarpJacobian warp_jacobian(double x, double y, double depth, const RigidTransform& pose,
                           const Intrinsics& k) {
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  const Eigen::Vector3d ray = pixel_ray(k, x, y);
  const Eigen::Vector3d point = depth * ray;
  const Eigen::Vector3d moved = rot * point + pose.translation;
  const Eigen::Matrix<double, 2, 3> jp = projection_jacobian(moved, k);
  WarpJacobian j;
  j.d_depth = jp * (rot * ray);
  j.d_pose = jp * motion_jacobian(rot, so3_right_jacobian(pose.rotation), point);
  return j;
}

}  // namespace udepth
