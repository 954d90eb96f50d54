#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "udepth/geometry.hpp"
#include "udepth/image.hpp"

namespace udepth {

/// Bilinear cell of a continuous coordinate: neighbors (x0, y0), (x0+1, y0),
/// (x0, y0+1), (x0+1, y0+1) with fractional offsets (a, b) in [0,1].
struct BilinearCell {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  double a = 0;
  double b = 0;
};

/// Locates the cell of (u, v) inside a width x height grid. The floor
/// (right-continuous) branch is used everywhere except exactly on the last
/// column/row, where the cell to the left/above is taken with a = 1 / b = 1.
/// Returns nullopt outside [0, W-1] x [0, H-1].
inline std::optional<BilinearCell> locate_cell(double u, double v, int width, int height) {
  if (!(u >= 0 && v >= 0 && u <= width - 1 && v <= height - 1)) return std::nullopt;
  BilinearCell c;
  c.x0 = static_cast<int>(std::floor(u));
  c.y0 = static_cast<int>(std::floor(v));
  if (c.x0 >= width - 1) c.x0 = std::max(width - 2, 0);
  if (c.y0 >= height - 1) c.y0 = std::max(height - 2, 0);
  c.x1 = std::min(c.x0 + 1, width - 1);
  c.y1 = std::min(c.y0 + 1, height - 1);
  c.a = u - c.x0;
  c.b = v - c.y0;
  return c;
}

template <typename Derived>
double interpolate(const Eigen::DenseBase<Derived>& plane, const BilinearCell& c) {
  return (1 - c.a) * (1 - c.b) * plane(c.y0, c.x0) + c.a * (1 - c.b) * plane(c.y0, c.x1) +
         (1 - c.a) * c.b * plane(c.y1, c.x0) + c.a * c.b * plane(c.y1, c.x1);
}

/// d/du and d/dv of the bilinear interpolant inside the cell.
template <typename Derived>
Eigen::Vector2d interpolate_gradient(const Eigen::DenseBase<Derived>& plane, const BilinearCell& c) {
  const double i00 = plane(c.y0, c.x0);
  const double i10 = plane(c.y0, c.x1);
  const double i01 = plane(c.y1, c.x0);
  const double i11 = plane(c.y1, c.x1);
  return {(1 - c.b) * (i10 - i00) + c.b * (i11 - i01), (1 - c.a) * (i01 - i00) + c.a * (i11 - i10)};
}

/// Reconstruction of the target by pulling source intensities; invalid pixels
/// hold 0 in every channel.
struct SampleResult {
  ImageBuffer image;
  Mask mask;
};

/// Per-pixel derivative of each sampled channel w.r.t. the continuous
/// coordinate; zero where the sample is masked out.
struct SampleJacobian {
  std::vector<Plane<double>> d_u;
  std::vector<Plane<double>> d_v;
};

/// Area-weighted four-neighbor blend. A pixel is valid when its flow is valid,
/// its coordinate lies inside the source, and (if given) all four source
/// neighbors are valid in `source_mask`.
SampleResult bilinear_sample(const ImageBuffer& src, const FlowField& flow,
                             const Mask* source_mask = nullptr);

SampleJacobian bilinear_sample_jacobian(const ImageBuffer& src, const FlowField& flow,
                                        const Mask* source_mask = nullptr);

}  // namespace udepth
