#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace udepth {

template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kPyramidLevels = 4;

/// Dense H x W x C image with one Eigen plane per channel, values in [0,1].
template <typename Scalar>
class Image {
 public:
  using PlaneType = Plane<Scalar>;

  Image() = default;
  Image(int width, int height, int channels, Scalar fill = Scalar(0))
      : planes_(static_cast<std::size_t>(channels), PlaneType::Constant(height, width, fill)) {}
  explicit Image(std::vector<PlaneType> planes) : planes_(std::move(planes)) {}

  int width() const { return planes_.empty() ? 0 : static_cast<int>(planes_.front().cols()); }
  int height() const { return planes_.empty() ? 0 : static_cast<int>(planes_.front().rows()); }
  int channels() const { return static_cast<int>(planes_.size()); }
  bool empty() const { return planes_.empty() || planes_.front().size() == 0; }

  Scalar& operator()(int y, int x, int c = 0) { return planes_[c](y, x); }
  Scalar operator()(int y, int x, int c = 0) const { return planes_[c](y, x); }

  PlaneType& plane(int c) { return planes_[c]; }
  const PlaneType& plane(int c) const { return planes_[c]; }

  bool same_shape(const Image& other) const {
    return width() == other.width() && height() == other.height() &&
           channels() == other.channels();
  }

  /// True when every value is finite and inside [0,1].
  bool in_unit_range() const {
    for (const auto& p : planes_) {
      if (!p.allFinite() || (p.array() < Scalar(0)).any() || (p.array() > Scalar(1)).any())
        return false;
    }
    return true;
  }

  /// Per-pixel mean over channels.
  PlaneType channel_mean() const {
    PlaneType out = PlaneType::Zero(height(), width());
    for (const auto& p : planes_) out += p;
    return out / Scalar(channels());
  }

 private:
  std::vector<PlaneType> planes_;
};

using ImageBuffer = Image<double>;

/// Per-pixel positive scalars plus a validity mask. Used for depth (meters)
/// and for disparity (inverse meters) alike.
template <typename Scalar>
struct DepthMapT {
  Plane<Scalar> values;
  Mask mask;

  DepthMapT() = default;
  DepthMapT(Plane<Scalar> v, Mask m) : values(std::move(v)), mask(std::move(m)) {}

  /// Mask derived from the values: valid where finite and strictly positive.
  static DepthMapT from_values(Plane<Scalar> v) {
    Mask m = v.array().isFinite() && (v.array() > Scalar(0));
    Plane<Scalar> cleaned = m.select(v.array(), Scalar(0)).matrix();
    return DepthMapT(std::move(cleaned), std::move(m));
  }

  static DepthMapT constant(int width, int height, Scalar value) {
    return from_values(Plane<Scalar>::Constant(height, width, value));
  }

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  Eigen::Index valid_count() const { return mask.count(); }
  bool same_shape(const DepthMapT& o) const {
    return width() == o.width() && height() == o.height();
  }

  bool satisfies_invariants() const {
    if (mask.rows() != values.rows() || mask.cols() != values.cols()) return false;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const Scalar v = values.data()[i];
      const bool ok = std::isfinite(v) && v > Scalar(0);
      if (mask.data()[i] && !ok) return false;
    }
    return true;
  }
};

using DepthMap = DepthMapT<double>;
using DisparityMap = DepthMapT<double>;

/// Elementwise reciprocal on the valid pixels (depth <-> disparity).
DepthMap invert(const DepthMap& map);

/// Separable bilinear resampling (align-corners-false, edge clamped) as a
/// pair of sparse 1-D operators, so that out = Ry * in * Rx^T and the
/// adjoint is Ry^T * g * Rx.
class ResizeOperator {
 public:
  ResizeOperator(int in_width, int in_height, int out_width, int out_height);

  int in_width() const { return static_cast<int>(cols_.cols()); }
  int in_height() const { return static_cast<int>(rows_.cols()); }
  int out_width() const { return static_cast<int>(cols_.rows()); }
  int out_height() const { return static_cast<int>(rows_.rows()); }

  Plane<double> apply(const Plane<double>& in) const;
  Plane<double> adjoint(const Plane<double>& grad_out) const;

  const Eigen::SparseMatrix<double>& rows() const { return rows_; }
  const Eigen::SparseMatrix<double>& cols() const { return cols_; }

 private:
  Eigen::SparseMatrix<double> rows_;
  Eigen::SparseMatrix<double> cols_;
};

ImageBuffer resize_bilinear(const ImageBuffer& img, int width, int height);
Plane<double> resize_bilinear(const Plane<double>& plane, int width, int height);

template <typename Scalar>
Image<Scalar> flip_horizontal(const Image<Scalar>& img) {
  std::vector<Plane<Scalar>> planes;
  planes.reserve(static_cast<std::size_t>(img.channels()));
  for (int c = 0; c < img.channels(); ++c) planes.emplace_back(img.plane(c).rowwise().reverse());
  return Image<Scalar>(std::move(planes));
}

template <typename Scalar>
DepthMapT<Scalar> flip_horizontal(const DepthMapT<Scalar>& map) {
  return DepthMapT<Scalar>(map.values.rowwise().reverse(), map.mask.rowwise().reverse());
}

/// Four levels, each halving the previous one; level 0 is the input.
std::array<ImageBuffer, kPyramidLevels> build_pyramid(const ImageBuffer& img);

/// Chained halving of a dense plane (disparity levels); level 0 is the input.
std::array<Plane<double>, kPyramidLevels> build_pyramid(const Plane<double>& plane);

/// Chained halving of a masked map in the inverse domain; a coarse pixel is
/// valid only when all four children are.
std::array<DepthMap, kPyramidLevels> build_depth_pyramid(const DepthMap& depth);

/// Throws std::invalid_argument unless width and height are divisible by 8.
void check_pyramid_size(int width, int height);

}  // namespace udepth
