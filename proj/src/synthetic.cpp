#include "udepth/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "udepth/errors.hpp"
#include "udepth/sampler.hpp"

namespace udepth {
namespace {

// A planar patch n . P = 1 in the target frame, owning target columns
// [x_lo, x_hi).
struct Patch {
  Eigen::Vector3d normal;
  double x_lo;
  double x_hi;
};

std::vector<Patch> scene_patches(const SyntheticOptions& o, const Intrinsics& k) {
  const double d0 = 1.0 / o.base_depth;
  const double inf = std::numeric_limits<double>::infinity();
  switch (o.profile) {
    case DepthProfile::kPlane:
      return {{Eigen::Vector3d(0, 0, d0), -inf, inf}};
    case DepthProfile::kSlant: {
      // 1/Z = d0 + a (x - cx) / W + b (y - cy) / H
      const double a = 0.25 * d0;
      const double b = 0.15 * d0;
      return {{Eigen::Vector3d(a * k.fx / o.width, b * k.fy / o.height, d0), -inf, inf}};
    }
    case DepthProfile::kSteps: {
      const double scale[] = {1.0, 0.8, 1.25, 0.9};
      std::vector<Patch> out;
      for (int i = 0; i < 4; ++i) {
        const double lo = i == 0 ? -inf : i * o.width / 4.0 - 0.5;
        const double hi = i == 3 ? inf : (i + 1) * o.width / 4.0 - 0.5;
        out.push_back({Eigen::Vector3d(0, 0, d0 / scale[i]), lo, hi});
      }
      return out;
    }
  }
  throw std::invalid_argument("unknown depth profile");
}

double target_inverse_depth(const std::vector<Patch>& patches, const Intrinsics& k, double x,
                            double y) {
  for (const auto& p : patches)
    if (x >= p.x_lo && x < p.x_hi) return p.normal.dot(pixel_ray(k, x, y));
  return 0;
}

// Nearest surface along the source pixel ray; 0 if nothing is hit.
double cast_source_ray(const std::vector<Patch>& patches, const RigidTransform& pose,
                       const Intrinsics& k, double u, double v) {
  const Eigen::Matrix3d rot = pose.rotation_matrix();
  const Eigen::Vector3d ray = pixel_ray(k, u, v);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : patches) {
    // Target point P = R^T (Ps - t); n . P = 1  =>  (R n) . Ps = 1 + (R n) . t
    const Eigen::Vector3d m = rot * p.normal;
    const double denom = m.dot(ray);
    if (std::abs(denom) < 1e-15) continue;
    const double lambda = (1.0 + m.dot(pose.translation)) / denom;
    if (!(lambda > 0)) continue;
    const Eigen::Vector3d target_point = rot.transpose() * (lambda * ray - pose.translation);
    if (!(target_point.z() > 0)) continue;
    const double xt = k.fx * target_point.x() / target_point.z() + k.cx;
    if (xt >= p.x_lo && xt < p.x_hi) best = std::min(best, lambda);
  }
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace

const char* to_string(DepthProfile p) {
  switch (p) {
    case DepthProfile::kPlane: return "plane";
    case DepthProfile::kSlant: return "slant";
    case DepthProfile::kSteps: return "steps";
  }
  return "?";
}

DepthProfile parse_profile(const std::string& s) {
  if (s == "plane") return DepthProfile::kPlane;
  if (s == "slant") return DepthProfile::kSlant;
  if (s == "steps") return DepthProfile::kSteps;
  throw std::invalid_argument("unknown depth profile '" + s + "' (expected plane, slant or steps)");
}

Intrinsics synthetic_intrinsics(int width, int height) {
  return {0.9 * width, 0.9 * width, 0.5 * (width - 1), 0.5 * (height - 1)};
}

ImageBuffer noise_texture(std::uint64_t seed, int width, int height, int channels) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  ImageBuffer out(width, height, channels);
  for (int c = 0; c < channels; ++c) {
    Plane<double> acc = Plane<double>::Zero(height, width);
    double amplitude = 1.0;
    for (int cells = 4; cells <= std::max(width, height) * 2; cells *= 2) {
      const int gw = std::max(2, std::min(cells, width));
      const int gh = std::max(2, std::min(cells * height / std::max(width, 1), height));
      Plane<double> grid(gh, gw);
      for (Eigen::Index i = 0; i < grid.size(); ++i) grid.data()[i] = uniform(rng);
      acc += amplitude * resize_bilinear(grid, width, height);
      amplitude *= 0.7;
    }
    const double lo = acc.minCoeff();
    const double hi = acc.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    out.plane(c) = ((acc.array() - lo) / span * 0.9 + 0.05).matrix();
  }
  return out;
}

SyntheticScene make_synthetic_scene(std::uint64_t seed, const SyntheticOptions& o) {
  if (o.width < 2 || o.height < 2 || o.channels < 1)
    throw std::invalid_argument("make_synthetic_scene: bad image size");
  if (!(o.base_depth > 0)) throw std::invalid_argument("make_synthetic_scene: base depth must be positive");

  SyntheticScene s;
  s.intrinsics = synthetic_intrinsics(o.width, o.height);
  s.gt_pose = o.motion;
  const auto patches = scene_patches(o, s.intrinsics);

  Plane<double> disp(o.height, o.width);
  for (int y = 0; y < o.height; ++y)
    for (int x = 0; x < o.width; ++x) disp(y, x) = target_inverse_depth(patches, s.intrinsics, x, y);
  s.gt_disparity = DisparityMap::from_values(disp);
  s.gt_depth = invert(s.gt_disparity);

  Plane<double> src_depth(o.height, o.width);
  for (int y = 0; y < o.height; ++y)
    for (int x = 0; x < o.width; ++x) src_depth(y, x) = cast_source_ray(patches, o.motion, s.intrinsics, x, y);
  s.source_depth = DepthMap::from_values(src_depth);

  s.texture = noise_texture(seed, o.width, o.height, o.channels);
  s.source = s.texture;

  const FlowField flow = warp_coords(s.gt_depth, o.motion, s.intrinsics);
  const SampleResult sampled = bilinear_sample(s.source, flow);
  s.in_bounds_fraction = static_cast<double>(flow.valid.count()) / static_cast<double>(flow.valid.size());
  if (s.in_bounds_fraction < o.min_in_bounds) {
    throw DataError("make_synthetic_scene: only " + std::to_string(s.in_bounds_fraction * 100.0) +
                    "% of target pixels stay in bounds (need " +
                    std::to_string(o.min_in_bounds * 100.0) + "%)");
  }

  s.target = sampled.image;
  s.target_mask = sampled.mask;
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      if (!s.target_mask(y, x)) {
        // Clamp-sample pixels that leave the source.
        const bool ahead = flow.depth(y, x) > 0;
        const double u = ahead ? std::clamp(flow.u(y, x), 0.0, o.width - 1.0) : x;
        const double v = ahead ? std::clamp(flow.v(y, x), 0.0, o.height - 1.0) : y;
        const auto cell = locate_cell(u, v, o.width, o.height);
        for (int c = 0; c < o.channels; ++c) s.target(y, x, c) = interpolate(s.source.plane(c), *cell);
        continue;
      }
      const double visible = cast_source_ray(patches, o.motion, s.intrinsics, flow.u(y, x), flow.v(y, x));
      const double z = flow.depth(y, x);
      if (!(std::abs(visible - z) <= 1e-6 * z)) {
        s.target_mask(y, x) = false;
      }
    }
  }
  return s;
}

}  // namespace udepth
