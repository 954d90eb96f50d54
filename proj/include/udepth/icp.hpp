#pragma once

#include <string>
#include <vector>

#include "udepth/geometry.hpp"

namespace udepth {

/// Exact nearest-neighbor queries over a fixed 3-D point set. Brute force
/// below `kBruteForceLimit` points, a k-d tree above.
class NearestNeighbors {
 public:
  static constexpr Eigen::Index kBruteForceLimit = 5000;

  explicit NearestNeighbors(const Eigen::Matrix3Xd& points, bool force_tree = false);

  /// Index of the closest point and its squared distance.
  std::pair<int, double> nearest(const Eigen::Vector3d& query) const;
  bool uses_tree() const { return !nodes_.empty(); }

 private:
  struct Node {
    int begin = 0;  // range into order_
    int end = 0;
    int axis = -1;  // -1 for leaves
    double split = 0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end);
  void search(int node, const Eigen::Vector3d& q, int& best, double& best_d2) const;

  const Eigen::Matrix3Xd& points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

struct IcpOptions {
  int max_iterations = 50;
  /// Stop once the incremental motion (rotation angle + translation norm)
  /// drops below this.
  double tolerance = 1e-10;
  /// Pairs farther than factor * median distance are dropped each iteration.
  double rejection_factor = 3.0;
};

struct IcpResult {
  RigidTransform transform;          // correction T' applied to src
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();
  Eigen::Matrix3Xd residuals;        // dst correspondent - T'(src point)
  std::vector<int> src_index;        // residual i belongs to src point src_index[i]
  std::vector<int> dst_index;
  bool converged = false;
  int iterations = 0;
  /// Mean squared nearest-neighbor distance over all src points, before each
  /// iteration and after the last one.
  std::vector<double> mse_history;
};

/// Point-to-point ICP: nearest-neighbor correspondences, median-based
/// rejection, closed-form rigid fit. Throws NumericalError for clouds with
/// fewer than 3 points or collinear / coincident points.
IcpResult icp_align(const PointCloud& src, const PointCloud& dst, const IcpOptions& options = {});
IcpResult icp_align(const PointCloud& src, const PointCloud& dst, int max_iterations,
                    double tolerance);

/// Fewer than 3 points, or all points coincident / collinear.
bool is_degenerate(const Eigen::Matrix3Xd& points);

/// ||T' - I||_1 over all 16 entries plus the L1 norm of every residual.
double icp_3d_loss(const IcpResult& result);

/// d(3D loss)/d(depth) per target pixel and d/d(pose), with T' and the
/// second cloud held constant.
struct Loss3dGradient {
  Plane<double> d_depth;
  Vector6d d_pose = Vector6d::Zero();
};

struct Loss3dResult {
  double value = 0;
  bool skipped = false;
  std::string reason;
  IcpResult icp;
  PointCloud moved;   // target points after the pose, source_pixel = target pixel
  PointCloud sampled; // source-frame surface points at the warped coordinates
};

/// 3D loss at one resolution. The target depth is back-projected and moved by
/// `pose` into the source frame; the source depth is sampled (bilinearly in
/// inverse depth) at each moved point's projection and lifted there. ICP
/// aligns the moved cloud onto the sampled one. Degenerate clouds skip the
/// term (value 0, `skipped` set).
Loss3dResult per_scale_3d_loss(const DepthMap& target_depth, const DepthMap& source_depth,
                               const RigidTransform& pose, const Intrinsics& k,
                               const IcpOptions& options = {}, Loss3dGradient* grad = nullptr);

}  // namespace udepth
