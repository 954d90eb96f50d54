#include "udepth/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace udepth {
namespace {

void check_same(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": image shapes differ");
}

// Window statistics of one channel around (y, x) with clamped indices.
struct WindowStats {
  double mu_x = 0;
  double mu_y = 0;
  double var_x = 0;
  double var_y = 0;
  double cov = 0;
  double a1 = 0;
  double a2 = 0;
  double b1 = 0;
  double b2 = 0;
  double ssim = 0;
};

template <typename Visit>
void for_window(int y, int x, int radius, int height, int width, Visit&& visit) {
  for (int dy = -radius; dy <= radius; ++dy) {
    const int yy = std::clamp(y + dy, 0, height - 1);
    for (int dx = -radius; dx <= radius; ++dx) {
      const int xx = std::clamp(x + dx, 0, width - 1);
      visit(yy, xx);
    }
  }
}

WindowStats window_stats(const Plane<double>& px, const Plane<double>& py, int y, int x,
                         const SsimParams& p) {
  const int r = p.window / 2;
  const int h = static_cast<int>(px.rows());
  const int w = static_cast<int>(px.cols());
  const double n = static_cast<double>(p.window * p.window);
  WindowStats s;
  for_window(y, x, r, h, w, [&](int yy, int xx) {
    s.mu_x += px(yy, xx);
    s.mu_y += py(yy, xx);
  });
  s.mu_x /= n;
  s.mu_y /= n;
  for_window(y, x, r, h, w, [&](int yy, int xx) {
    const double dx = px(yy, xx) - s.mu_x;
    const double dy = py(yy, xx) - s.mu_y;
    s.var_x += dx * dx;
    s.var_y += dy * dy;
    s.cov += dx * dy;
  });
  s.var_x /= n;
  s.var_y /= n;
  s.cov /= n;
  s.a1 = 2 * s.mu_x * s.mu_y + p.c1;
  s.a2 = 2 * s.cov + p.c2;
  s.b1 = s.mu_x * s.mu_x + s.mu_y * s.mu_y + p.c1;
  s.b2 = s.var_x + s.var_y + p.c2;
  s.ssim = (s.a1 * s.a2) / (s.b1 * s.b2);
  return s;
}

}  // namespace

bool LossWeights::valid() const {
  for (double v : {alpha, beta, gamma, omega})
    if (!std::isfinite(v) || v < 0) return false;
  return true;
}

LossBreakdown total_loss(LossBreakdown parts, const LossWeights& w) {
  double total = w.alpha * parts.reconstr + w.beta * parts.ssim;
  for (int s = 0; s < kPyramidLevels; ++s)
    total += w.gamma * parts.smooth_per_scale[s] + w.omega * parts.loss3d_per_scale[s];
  parts.total = total;
  return parts;
}

ScalarLoss reconstruction_loss(const ImageBuffer& target, const SampleResult& warped) {
  check_same(target, warped.image, "reconstruction_loss");
  ScalarLoss loss;
  Eigen::Index count = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!warped.mask(y, x)) continue;
      ++count;
      for (int c = 0; c < target.channels(); ++c)
        loss.value += std::abs(target(y, x, c) - warped.image(y, x, c));
    }
  }
  loss.empty_mask = count == 0;
  return loss;
}

std::vector<Plane<double>> reconstruction_loss_grad(const ImageBuffer& target,
                                                    const SampleResult& warped) {
  check_same(target, warped.image, "reconstruction_loss_grad");
  std::vector<Plane<double>> grad(static_cast<std::size_t>(target.channels()),
                                  Plane<double>::Zero(target.height(), target.width()));
  for (int y = 0; y < target.height(); ++y)
    for (int x = 0; x < target.width(); ++x) {
      if (!warped.mask(y, x)) continue;
      for (int c = 0; c < target.channels(); ++c)
        grad[c](y, x) = subgradient_sign(warped.image(y, x, c) - target(y, x, c));
    }
  return grad;
}

Plane<double> ssim_map(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& params) {
  check_same(x, y, "ssim_map");
  if (!params.valid()) throw std::invalid_argument("ssim_map: invalid SSIM parameters");
  Plane<double> out = Plane<double>::Zero(x.height(), x.width());
  for (int c = 0; c < x.channels(); ++c)
    for (int r = 0; r < x.height(); ++r)
      for (int col = 0; col < x.width(); ++col)
        out(r, col) += window_stats(x.plane(c), y.plane(c), r, col, params).ssim;
  return out / static_cast<double>(x.channels());
}

Mask erode_mask(const Mask& mask, int window) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  Mask out = Mask::Constant(h, w, false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool all = true;
      for_window(y, x, window / 2, h, w, [&](int yy, int xx) { all = all && mask(yy, xx); });
      out(y, x) = all;
    }
  return out;
}

ScalarLoss ssim_loss(const ImageBuffer& target, const SampleResult& warped,
                     const SsimParams& params) {
  check_same(target, warped.image, "ssim_loss");
  if (!params.valid()) throw std::invalid_argument("ssim_loss: invalid SSIM parameters");
  const Mask valid = erode_mask(warped.mask, params.window);
  ScalarLoss loss;
  const double channels = target.channels();
  Eigen::Index count = 0;
  for (int y = 0; y < target.height(); ++y)
    for (int x = 0; x < target.width(); ++x) {
      if (!valid(y, x)) continue;
      ++count;
      double mean = 0;
      for (int c = 0; c < target.channels(); ++c)
        mean += window_stats(target.plane(c), warped.image.plane(c), y, x, params).ssim;
      loss.value += 1.0 - mean / channels;
    }
  loss.empty_mask = count == 0;
  return loss;
}

std::vector<Plane<double>> ssim_loss_grad(const ImageBuffer& target, const SampleResult& warped,
                                          const SsimParams& params) {
  check_same(target, warped.image, "ssim_loss_grad");
  const int h = target.height();
  const int w = target.width();
  const Mask valid = erode_mask(warped.mask, params.window);
  const double n = static_cast<double>(params.window * params.window);
  const double channels = target.channels();
  std::vector<Plane<double>> grad(static_cast<std::size_t>(target.channels()),
                                  Plane<double>::Zero(h, w));
  for (int c = 0; c < target.channels(); ++c) {
    const Plane<double>& px = target.plane(c);
    const Plane<double>& py = warped.image.plane(c);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!valid(y, x)) continue;
        const WindowStats s = window_stats(px, py, y, x, params);
        const double inv_b = 1.0 / (s.b1 * s.b2);
        for_window(y, x, params.window / 2, h, w, [&](int yy, int xx) {
          const double d_ssim =
              ((2 * s.mu_x * s.a2 + s.a1 * 2 * (px(yy, xx) - s.mu_x)) * inv_b -
               s.ssim * (2 * s.mu_y / s.b1 + 2 * (py(yy, xx) - s.mu_y) / s.b2)) / n;
          grad[c](yy, xx) -= d_ssim / channels;
        });
      }
  }
  return grad;
}

double smoothness_loss(const DisparityMap& disparity, const ImageBuffer& img) {
  if (disparity.width() != img.width() || disparity.height() != img.height())
    throw std::invalid_argument("smoothness_loss: disparity and image sizes differ");
  const int h = img.height();
  const int w = img.width();
  const double channels = img.channels();
  double loss = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!disparity.mask(y, x)) continue;
      if (x + 1 < w && disparity.mask(y, x + 1)) {
        double g = 0;
        for (int c = 0; c < img.channels(); ++c) g += std::abs(img(y, x + 1, c) - img(y, x, c));
        loss += std::abs(disparity.values(y, x + 1) - disparity.values(y, x)) *
                std::exp(-g / channels);
      }
      if (y + 1 < h && disparity.mask(y + 1, x)) {
        double g = 0;
        for (int c = 0; c < img.channels(); ++c) g += std::abs(img(y + 1, x, c) - img(y, x, c));
        loss += std::abs(disparity.values(y + 1, x) - disparity.values(y, x)) *
                std::exp(-g / channels);
      }
    }
  return loss;
}

double smoothness_loss(const Plane<double>& disparity, const ImageBuffer& img) {
  return smoothness_loss(
      DisparityMap(disparity, Mask::Constant(disparity.rows(), disparity.cols(), true)), img);
}

Plane<double> smoothness_loss_grad(const Plane<double>& disparity, const ImageBuffer& img) {
  if (disparity.cols() != img.width() || disparity.rows() != img.height())
    throw std::invalid_argument("smoothness_loss_grad: disparity and image sizes differ");
  const int h = img.height();
  const int w = img.width();
  const double channels = img.channels();
  Plane<double> grad = Plane<double>::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        double g = 0;
        for (int c = 0; c < img.channels(); ++c) g += std::abs(img(y, x + 1, c) - img(y, x, c));
        const double s =
            subgradient_sign(disparity(y, x + 1) - disparity(y, x)) * std::exp(-g / channels);
        grad(y, x + 1) += s;
        grad(y, x) -= s;
      }
      if (y + 1 < h) {
        double g = 0;
        for (int c = 0; c < img.channels(); ++c) g += std::abs(img(y + 1, x, c) - img(y, x, c));
        const double s =
            subgradient_sign(disparity(y + 1, x) - disparity(y, x)) * std::exp(-g / channels);
        grad(y + 1, x) += s;
        grad(y, x) -= s;
      }
    }
  return grad;
}

}  // namespace udepth
