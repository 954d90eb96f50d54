#include "udepth/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace udepth {
namespace {

// 1-D bilinear weights: out index o samples input coordinate
// (o + 0.5) * in / out - 0.5, clamped to [0, in - 1].
Eigen::SparseMatrix<double> resize_weights(int in, int out) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (int o = 0; o < out; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, in - 1);
    const double w1 = s - i0;
    if (i1 == i0 || w1 == 0.0) {
      triplets.emplace_back(o, i0, 1.0);
    } else {
      triplets.emplace_back(o, i0, 1.0 - w1);
      triplets.emplace_back(o, i1, w1);
    }
  }
  Eigen::SparseMatrix<double> m(out, in);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

DepthMap invert(const DepthMap& map) {
  Plane<double> v = map.mask.select(map.values.array().inverse(), 0.0).matrix();
  return DepthMap(std::move(v), map.mask);
}

ResizeOperator::ResizeOperator(int in_width, int in_height, int out_width, int out_height) {
  if (in_width < 1 || in_height < 1) throw std::invalid_argument("resize: empty input");
  if (out_width < 1 || out_height < 1)
    throw std::invalid_argument("resize: target size must be at least 1x1");
  rows_ = resize_weights(in_height, out_height);
  cols_ = resize_weights(in_width, out_width);
}

Plane<double> ResizeOperator::apply(const Plane<double>& in) const {
  if (in.rows() != in_height() || in.cols() != in_width())
    throw std::invalid_argument("resize: input size does not match operator");
  Eigen::MatrixXd tmp = rows_ * in;
  Eigen::MatrixXd out = (cols_ * tmp.transpose()).transpose();
  return out;
}

Plane<double> ResizeOperator::adjoint(const Plane<double>& grad_out) const {
  if (grad_out.rows() != out_height() || grad_out.cols() != out_width())
    throw std::invalid_argument("resize adjoint: gradient size does not match operator");
  Eigen::MatrixXd tmp = rows_.transpose() * grad_out;
  Eigen::MatrixXd out = (cols_.transpose() * tmp.transpose()).transpose();
  return out;
}

Plane<double> resize_bilinear(const Plane<double>& plane, int width, int height) {
  if (plane.cols() == width && plane.rows() == height) return plane;
  ResizeOperator op(static_cast<int>(plane.cols()), static_cast<int>(plane.rows()), width, height);
  return op.apply(plane);
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int width, int height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("resize: target size must be at least 1x1");
  if (img.width() == width && img.height() == height) return img;
  ResizeOperator op(img.width(), img.height(), width, height);
  std::vector<Plane<double>> planes;
  for (int c = 0; c < img.channels(); ++c) {
    // Convex weights keep values in range up to rounding; clamp the rounding.
    planes.push_back(op.apply(img.plane(c)).cwiseMax(0.0).cwiseMin(1.0));
  }
  return ImageBuffer(std::move(planes));
}

void check_pyramid_size(int width, int height) {
  if (width < 8 || height < 8 || width % 8 != 0 || height % 8 != 0) {
    throw std::invalid_argument("pyramid: width and height must be positive multiples of 8, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
}

std::array<ImageBuffer, kPyramidLevels> build_pyramid(const ImageBuffer& img) {
  check_pyramid_size(img.width(), img.height());
  std::array<ImageBuffer, kPyramidLevels> levels;
  levels[0] = img;
  for (int k = 1; k < kPyramidLevels; ++k) {
    const auto& prev = levels[k - 1];
    levels[k] = resize_bilinear(prev, prev.width() / 2, prev.height() / 2);
  }
  return levels;
}

std::array<Plane<double>, kPyramidLevels> build_pyramid(const Plane<double>& plane) {
  check_pyramid_size(static_cast<int>(plane.cols()), static_cast<int>(plane.rows()));
  std::array<Plane<double>, kPyramidLevels> levels;
  levels[0] = plane;
  for (int k = 1; k < kPyramidLevels; ++k) {
    const auto& prev = levels[k - 1];
    levels[k] = resize_bilinear(prev, static_cast<int>(prev.cols() / 2),
                                static_cast<int>(prev.rows() / 2));
  }
  return levels;
}

std::array<DepthMap, kPyramidLevels> build_depth_pyramid(const DepthMap& depth) {
  check_pyramid_size(depth.width(), depth.height());
  std::array<DepthMap, kPyramidLevels> levels;
  levels[0] = depth;
  Plane<double> inv = invert(depth).values;
  Plane<double> valid = depth.mask.cast<double>().matrix();
  for (int k = 1; k < kPyramidLevels; ++k) {
    const int w = static_cast<int>(inv.cols() / 2);
    const int h = static_cast<int>(inv.rows() / 2);
    inv = resize_bilinear(inv, w, h);
    valid = resize_bilinear(valid, w, h);
    Mask m = valid.array() > 1.0 - 1e-12;
    Plane<double> d = m.select(inv.array().inverse(), 0.0).matrix();
    levels[k] = DepthMap(std::move(d), m);
    valid = m.cast<double>().matrix();
    inv = m.select(inv.array(), 0.0).matrix();
  }
  return levels;
}

}  // namespace udepth
