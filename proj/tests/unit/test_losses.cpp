#include <doctest.h>

#include <random>

#include "udepth/losses.hpp"

using namespace udepth;

namespace {

ImageBuffer random_image(int w, int h, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageBuffer img(w, h, c);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img(y, x, ch) = u(rng);
  return img;
}

SampleResult full(const ImageBuffer& img) {
  return {img, Mask::Constant(img.height(), img.width(), true)};
}

}  // namespace

TEST_CASE("reconstruction loss examples") {
  const ImageBuffer a = random_image(9, 7, 3, 1);
  CHECK(reconstruction_loss(a, full(a)).value == 0.0);

  const ImageBuffer ones(6, 5, 1, 1.0);
  CHECK(reconstruction_loss(ones, full(ImageBuffer(6, 5, 1, 0.0))).value == doctest::Approx(30.0));

  const ImageBuffer b = random_image(9, 7, 3, 2);
  SampleResult half = full(b);
  half.mask.topRows(3).setConstant(false);
  double oracle = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = 3; y < 7; ++y)
      for (int x = 0; x < 9; ++x) oracle += std::abs(a(y, x, c) - b(y, x, c));
  CHECK(reconstruction_loss(a, half).value == doctest::Approx(oracle).epsilon(1e-14));

  SampleResult none = full(b);
  none.mask.setConstant(false);
  const ScalarLoss empty = reconstruction_loss(a, none);
  CHECK(empty.value == 0.0);
  CHECK(empty.empty_mask);
}

TEST_CASE("SSIM of identical images is one") {
  const ImageBuffer a = random_image(10, 8, 3, 3);
  const Plane<double> s = ssim_map(a, a, SsimParams{});
  CHECK((s.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(ssim_loss(a, full(a), SsimParams{}).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("SSIM of constant images has a closed form") {
  const SsimParams p;
  for (auto [a, b] : {std::pair{0.3, 0.7}, std::pair{1.0, 0.0}, std::pair{0.5, 0.5}}) {
    const Plane<double> s = ssim_map(ImageBuffer(6, 6, 1, a), ImageBuffer(6, 6, 1, b), p);
    const double expected = (2 * a * b + p.c1) / (a * a + b * b + p.c1);
    CHECK((s.array() - expected).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("SSIM is bounded on random pairs") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Plane<double> s = ssim_map(random_image(12, 9, 3, seed), random_image(12, 9, 3, seed + 100), SsimParams{});
    CHECK(s.maxCoeff() <= 1.0 + 1e-12);
    CHECK(s.allFinite());
  }
}

TEST_CASE("SSIM loss of unit versus zero constants") {
  const SsimParams p;
  const ScalarLoss l = ssim_loss(ImageBuffer(8, 8, 1, 1.0), full(ImageBuffer(8, 8, 1, 0.0)), p);
  CHECK(l.value == doctest::Approx(64 * (1 - p.c1 / (1 + p.c1))).epsilon(1e-12));

  const ScalarLoss wide = ssim_loss(ImageBuffer(16, 8, 1, 1.0), full(ImageBuffer(16, 8, 1, 0.0)), p);
  CHECK(wide.value == doctest::Approx(2 * l.value).epsilon(1e-12));
}

TEST_CASE("mask erosion") {
  Mask m = Mask::Constant(7, 7, true);
  m(3, 3) = false;
  const Mask e = erode_mask(m, 3);
  CHECK(e.count() == 49 - 9);
  CHECK_FALSE(e(2, 2));
  CHECK(e(1, 1));
  CHECK(erode_mask(Mask::Constant(4, 4, true), 3).all());
}

TEST_CASE("smoothness examples") {
  const ImageBuffer flat(10, 6, 3, 0.4);
  CHECK(smoothness_loss(Plane<double>::Constant(6, 10, 0.7), flat) == 0.0);

  const double s = -0.03;
  Plane<double> ramp(6, 10);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) ramp(y, x) = 0.5 + s * x;
  CHECK(smoothness_loss(ramp, flat) == doctest::Approx(9 * 6 * std::abs(s)).epsilon(1e-12));

  ImageBuffer striped(10, 6, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 10; ++x) striped(y, x, c) = x % 2 ? 0.9 : 0.1;
  const double damped = smoothness_loss(ramp, striped);
  CHECK(damped == doctest::Approx(9 * 6 * std::abs(s) * std::exp(-0.8)).epsilon(1e-12));
  CHECK(damped < smoothness_loss(ramp, flat));

  DisparityMap masked = DisparityMap::from_values(ramp);
  masked.mask(0, 0) = false;
  CHECK(smoothness_loss(masked, flat) == doctest::Approx((9 * 6 - 1) * std::abs(s)).epsilon(1e-12));
}

TEST_CASE("total loss arithmetic") {
  const LossWeights w;
  LossBreakdown zero;
  CHECK(total_loss(zero, w).total == 0.0);

  LossBreakdown unit;
  unit.reconstr = 1;
  unit.ssim = 1;
  unit.smooth_per_scale.fill(1);
  unit.loss3d_per_scale.fill(1);
  CHECK(total_loss(unit, w).total == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(total_loss(unit, w.scaled(2)).total == doctest::Approx(4.0).epsilon(1e-15));

  LossBreakdown mixed = unit;
  mixed.reconstr = 0.3;
  mixed.smooth_per_scale = {0.1, 0.2, 0.3, 0.4};
  const double expected = 0.85 * 0.3 + 0.15 + 0.15 * 1.0 + 0.1 * 4;
  CHECK(std::abs(total_loss(mixed, w).total - expected) <= 1e-12);

  CHECK_FALSE(LossWeights{-0.1, 0.15, 0.15, 0.1}.valid());
  CHECK(LossWeights{0, 0, 0, 0}.valid());
}

TEST_CASE("subgradient sign dead zone") {
  CHECK(subgradient_sign(1e-12) == 0.0);
  CHECK(subgradient_sign(-1e-12) == 0.0);
  CHECK(subgradient_sign(2e-12) == 1.0);
  CHECK(subgradient_sign(-0.5) == -1.0);
}

namespace {

template <typename Loss, typename Grad>
int fd_failures(const ImageBuffer& target, const SampleResult& warped, Loss loss, Grad grad) {
  const auto g = grad(target, warped);
  const double h = 1e-5;
  int failures = 0;
  for (int c = 0; c < warped.image.channels(); ++c) {
    for (int y = 0; y < warped.image.height(); ++y) {
      for (int x = 0; x < warped.image.width(); ++x) {
        SampleResult p = warped, m = warped;
        p.image(y, x, c) += h;
        m.image(y, x, c) -= h;
        const double fd = (loss(target, p) - loss(target, m)) / (2 * h);
        const double a = g[c](y, x);
        if (std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-2}) > 1e-4) ++failures;
      }
    }
  }
  return failures;
}

}  // namespace

TEST_CASE("reconstruction and SSIM gradients match finite differences") {
  const ImageBuffer target = random_image(11, 9, 3, 7);
  SampleResult warped = full(random_image(11, 9, 3, 8));
  warped.mask(4, 4) = false;
  warped.mask(0, 10) = false;
  for (int c = 0; c < 3; ++c) {
    warped.image(4, 4, c) = 0;
    warped.image(0, 10, c) = 0;
  }
  const SsimParams p;
  CHECK(fd_failures(
            target, warped, [](const auto& t, const auto& w) { return reconstruction_loss(t, w).value; },
            [](const auto& t, const auto& w) { return reconstruction_loss_grad(t, w); }) == 0);
  CHECK(fd_failures(
            target, warped, [&](const auto& t, const auto& w) { return ssim_loss(t, w, p).value; },
            [&](const auto& t, const auto& w) { return ssim_loss_grad(t, w, p); }) == 0);
}

TEST_CASE("smoothness gradient matches finite differences") {
  const ImageBuffer img = random_image(12, 8, 3, 9);
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  Plane<double> d(8, 12);
  for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = u(rng);
  const Plane<double> g = smoothness_loss_grad(d, img);
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    Plane<double> p = d, m = d;
    p.data()[i] += h;
    m.data()[i] -= h;
    const double fd = (smoothness_loss(p, img) - smoothness_loss(m, img)) / (2 * h);
    CHECK(g.data()[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}
