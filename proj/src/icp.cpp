#include "udepth/icp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "udepth/errors.hpp"
#include "udepth/losses.hpp"
#include "udepth/sampler.hpp"

namespace udepth {
namespace {

constexpr int kLeafSize = 16;

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

Eigen::Matrix3Xd transform_points(const Eigen::Matrix4d& t, const Eigen::Matrix3Xd& p) {
  return (t.topLeftCorner<3, 3>() * p).colwise() + t.topRightCorner<3, 1>();
}

struct Correspondences {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<double> d2;
  double mse_all = 0;
};

Correspondences match(const Eigen::Matrix3Xd& moved, const NearestNeighbors& nn, double factor) {
  const Eigen::Index n = moved.cols();
  std::vector<int> nearest(static_cast<std::size_t>(n));
  std::vector<double> d2(static_cast<std::size_t>(n));
  double sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [j, dist2] = nn.nearest(moved.col(i));
    nearest[i] = j;
    d2[i] = dist2;
    sum += dist2;
  }
  Correspondences c;
  c.mse_all = sum / static_cast<double>(n);
  std::vector<double> dist(d2.size());
  std::transform(d2.begin(), d2.end(), dist.begin(), [](double v) { return std::sqrt(v); });
  const double threshold = factor * median_of(dist);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dist[i] > threshold) continue;
    c.src.push_back(static_cast<int>(i));
    c.dst.push_back(nearest[i]);
    c.d2.push_back(d2[i]);
  }
  return c;
}

Eigen::Matrix3Xd gather(const Eigen::Matrix3Xd& p, const std::vector<int>& idx) {
  Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = p.col(idx[i]);
  return out;
}

}  // namespace

NearestNeighbors::NearestNeighbors(const Eigen::Matrix3Xd& points, bool force_tree)
    : points_(points) {
  if (points.cols() >= kBruteForceLimit || (force_tree && points.cols() > 0)) {
    order_.resize(static_cast<std::size_t>(points.cols()));
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(static_cast<std::size_t>(2 * points.cols() / kLeafSize + 2));
    build(0, static_cast<int>(points.cols()));
  }
}

int NearestNeighbors::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(order_[i]));
    hi = hi.cwiseMax(points_.col(order_[i]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_(axis, a) < points_(axis, b); });
  const double split = points_(axis, order_[mid]);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void NearestNeighbors::search(int id, const Eigen::Vector3d& q, int& best, double& best_d2) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int j = order_[i];
      const double d2 = (points_.col(j) - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
        best_d2 = d2;
        best = j;
      }
    }
    return;
  }
  const double diff = q(node.axis) - node.split;
  const int near = diff < 0 ? node.left : node.right;
  const int far = diff < 0 ? node.right : node.left;
  search(near, q, best, best_d2);
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

std::pair<int, double> NearestNeighbors::nearest(const Eigen::Vector3d& query) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) {
    if (points_.cols() == 0) return {best, best_d2};
    Eigen::Index j = 0;
    best_d2 = (points_.colwise() - query).colwise().squaredNorm().minCoeff(&j);
    best = static_cast<int>(j);
  } else {
    search(0, query, best, best_d2);
  }
  return {best, best_d2};
}

bool is_degenerate(const Eigen::Matrix3Xd& points) {
  if (points.cols() < 3) return true;
  const Eigen::Vector3d mean = points.rowwise().mean();
  const Eigen::Matrix3Xd centered = points.colwise() - mean;
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix3Xd>(centered).singularValues();
  const double scale = std::max(1.0, points.cwiseAbs().maxCoeff()) * std::sqrt(points.cols());
  if (sv(0) <= 1e-12 * scale) return true;  // coincident
  return sv(1) <= 1e-9 * sv(0);             // collinear
}

IcpResult icp_align(const PointCloud& src, const PointCloud& dst, int max_iterations,
                    double tolerance) {
  IcpOptions options;
  options.max_iterations = max_iterations;
  options.tolerance = tolerance;
  return icp_align(src, dst, options);
}

IcpResult icp_align(const PointCloud& src, const PointCloud& dst, const IcpOptions& options) {
  if (is_degenerate(src.points) || is_degenerate(dst.points))
    throw NumericalError("icp_align: degenerate point cloud (fewer than 3 points, or collinear)");
  const NearestNeighbors nn(dst.points);
  IcpResult result;
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::Matrix3Xd moved = transform_points(t, src.points);
    const Correspondences c = match(moved, nn, options.rejection_factor);
    result.mse_history.push_back(c.mse_all);
    result.iterations = it;
    if (c.mse_all == 0) {
      result.converged = true;
      break;
    }
    const Eigen::Matrix3Xd a = gather(moved, c.src);
    const Eigen::Matrix3Xd b = gather(dst.points, c.dst);
    if (is_degenerate(a)) throw NumericalError("icp_align: too few consistent correspondences");
    const Eigen::Matrix4d step = Eigen::umeyama(a, b, false);
    t = step * t;
    const double step_angle = Eigen::AngleAxisd(Eigen::Matrix3d(step.topLeftCorner<3, 3>())).angle();
    if (step_angle + step.topRightCorner<3, 1>().norm() < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  const Eigen::Matrix3Xd moved = transform_points(t, src.points);
  const Correspondences c = match(moved, nn, options.rejection_factor);
  result.mse_history.push_back(c.mse_all);
  result.matrix = t;
  result.transform = RigidTransform::from_matrix(t);
  result.src_index = c.src;
  result.dst_index = c.dst;
  result.residuals = gather(dst.points, c.dst) - gather(moved, c.src);
  return result;
}

double icp_3d_loss(const IcpResult& result) {
  return (result.matrix - Eigen::Matrix4d::Identity()).cwiseAbs().sum() +
         result.residuals.cwiseAbs().sum();
}

Loss3dResult per_scale_3d_loss(const DepthMap& target_depth, const DepthMap& source_depth,
                               const RigidTransform& pose, const Intrinsics& k,
                               const IcpOptions& options, Loss3dGradient* grad) {
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  const DepthMap source_inv = invert(source_depth);
  std::vector<Eigen::Vector3d> moved;
  std::vector<Eigen::Vector3d> sampled;
  std::vector<int> pixel;
  for (int y = 0; y < target_depth.height(); ++y) {
    for (int x = 0; x < target_depth.width(); ++x) {
      if (!target_depth.mask(y, x)) continue;
      const Eigen::Vector3d p = rot * (target_depth.values(y, x) * pixel_ray(k, x, y)) + pose.translation;
      if (!(p.z() > 0)) continue;
      const double u = k.fx * p.x() / p.z() + k.cx;
      const double v = k.fy * p.y() / p.z() + k.cy;
      const auto cell = locate_cell(u, v, source_depth.width(), source_depth.height());
      if (!cell) continue;
      const Mask& m = source_depth.mask;
      if (!(m(cell->y0, cell->x0) && m(cell->y0, cell->x1) && m(cell->y1, cell->x0) &&
            m(cell->y1, cell->x1)))
        continue;
      const double inv_depth = interpolate(source_inv.values, *cell);
      moved.push_back(p);
      sampled.push_back(pixel_ray(k, u, v) / inv_depth);
      pixel.push_back(y * target_depth.width() + x);
    }
  }

  Loss3dResult out;
  out.moved.points.resize(3, static_cast<Eigen::Index>(moved.size()));
  out.sampled.points.resize(3, static_cast<Eigen::Index>(sampled.size()));
  for (std::size_t i = 0; i < moved.size(); ++i) {
    out.moved.points.col(static_cast<Eigen::Index>(i)) = moved[i];
    out.sampled.points.col(static_cast<Eigen::Index>(i)) = sampled[i];
  }
  out.moved.source_pixel = pixel;
  out.sampled.source_pixel = pixel;
  if (grad) {
    grad->d_depth = Plane<double>::Zero(target_depth.height(), target_depth.width());
    grad->d_pose.setZero();
  }
  try {
    out.icp = icp_align(out.moved, out.sampled, options);
  } catch (const NumericalError& e) {
    out.skipped = true;
    out.reason = e.what();
    return out;
  }
  out.value = icp_3d_loss(out.icp);
  if (!grad) return out;

  const Eigen::Matrix3d correction = out.icp.matrix.topLeftCorner<3, 3>();
  const Eigen::Matrix3d jr = so3_right_jacobian(pose.rotation);
  for (std::size_t i = 0; i < out.icp.src_index.size(); ++i) {
    const Eigen::Vector3d r = out.icp.residuals.col(static_cast<Eigen::Index>(i));
    const Eigen::Vector3d sgn(subgradient_sign(r.x()), subgradient_sign(r.y()), subgradient_sign(r.z()));
    if (sgn.isZero(0.0)) continue;
    // r = dst - R' X' - t', so dL/dX' = -R'^T sgn(r).
    const Eigen::RowVector3d g = -(correction.transpose() * sgn).transpose();
    const int pix = pixel[static_cast<std::size_t>(out.icp.src_index[i])];
    const int y = pix / target_depth.width();
    const int x = pix % target_depth.width();
    const Eigen::Vector3d ray = pixel_ray(k, x, y);
    const Eigen::Vector3d point = target_depth.values(y, x) * ray;
    grad->d_depth(y, x) += g.dot(rot * ray);
    grad->d_pose += (g * motion_jacobian(rot, jr, point)).transpose();
  }
  return out;
}

}  // namespace udepth
