#include <doctest.h>

#include <random>

#include "udepth/image.hpp"

using namespace udepth;

namespace {

Plane<double> random_plane(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane<double> p(h, w);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

}  // namespace

TEST_CASE("resize to the same size is the identity") {
  const Plane<double> p = random_plane(13, 7, 1);
  const Plane<double> r = resize_bilinear(p, 13, 7);
  CHECK((r.array() == p.array()).all());
}

TEST_CASE("resize preserves constants") {
  const Plane<double> p = Plane<double>::Constant(6, 10, 0.37);
  for (auto [w, h] : {std::pair{5, 3}, std::pair{20, 12}, std::pair{7, 11}}) {
    const Plane<double> r = resize_bilinear(p, w, h);
    CHECK(r.rows() == h);
    CHECK(r.cols() == w);
    CHECK((r.array() - 0.37).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("upsampling a two pixel row is monotone and edge clamped") {
  Plane<double> p(1, 2);
  p << 0.0, 1.0;
  const Plane<double> r = resize_bilinear(p, 4, 1);
  REQUIRE(r.cols() == 4);
  CHECK(r(0, 0) == doctest::Approx(0.0));
  CHECK(r(0, 1) == doctest::Approx(0.25));
  CHECK(r(0, 2) == doctest::Approx(0.75));
  CHECK(r(0, 3) == doctest::Approx(1.0));
}

TEST_CASE("halving matches a 2x2 box average") {
  const Plane<double> p = random_plane(16, 10, 2);
  const Plane<double> r = resize_bilinear(p, 8, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 8; ++x) {
      const double box =
          0.25 * (p(2 * y, 2 * x) + p(2 * y, 2 * x + 1) + p(2 * y + 1, 2 * x) + p(2 * y + 1, 2 * x + 1));
      CHECK(r(y, x) == doctest::Approx(box).epsilon(1e-12));
    }
  }
}

TEST_CASE("resize operator adjoint identity") {
  for (auto [iw, ih, ow, oh] : {std::array{16, 12, 8, 6}, std::array{5, 7, 11, 3}, std::array{9, 9, 4, 13}}) {
    const ResizeOperator op(iw, ih, ow, oh);
    const Plane<double> x = random_plane(iw, ih, 3);
    const Plane<double> y = random_plane(ow, oh, 4);
    const double lhs = (op.apply(x).array() * y.array()).sum();
    const double rhs = (x.array() * op.adjoint(y).array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("horizontal flip") {
  ImageBuffer img(3, 1, 1);
  img(0, 0) = 0.1;
  img(0, 1) = 0.2;
  img(0, 2) = 0.3;
  const ImageBuffer f = flip_horizontal(img);
  CHECK(f(0, 0) == 0.3);
  CHECK(f(0, 1) == 0.2);
  CHECK(f(0, 2) == 0.1);

  ImageBuffer rnd(7, 5, 3);
  for (int c = 0; c < 3; ++c) rnd.plane(c) = random_plane(7, 5, 10 + c);
  const ImageBuffer back = flip_horizontal(flip_horizontal(rnd));
  for (int c = 0; c < 3; ++c) CHECK((back.plane(c).array() == rnd.plane(c).array()).all());

  DepthMap d = DepthMap::from_values(random_plane(6, 4, 5));
  d.mask(1, 0) = false;
  const DepthMap fd = flip_horizontal(d);
  CHECK_FALSE(fd.mask(1, 5));
  CHECK(fd.values(2, 0) == d.values(2, 5));
}

TEST_CASE("pyramid sizes") {
  ImageBuffer img(320, 192, 3, 0.5);
  const auto pyr = build_pyramid(img);
  CHECK(pyr[0].width() == 320);
  CHECK(pyr[1].width() == 160);
  CHECK(pyr[2].height() == 48);
  CHECK(pyr[3].width() == 40);
  CHECK(pyr[3].height() == 24);

  const auto tiny = build_pyramid(Plane<double>::Constant(8, 8, 2.0));
  CHECK(tiny[3].rows() == 1);
  CHECK(tiny[3].cols() == 1);
  CHECK(tiny[3](0, 0) == doctest::Approx(2.0));
}

TEST_CASE("pyramid size check") {
  CHECK_NOTHROW(check_pyramid_size(320, 192));
  CHECK_NOTHROW(check_pyramid_size(8, 8));
  CHECK_THROWS_AS(check_pyramid_size(100, 64), std::invalid_argument);
  CHECK_THROWS_AS(check_pyramid_size(64, 36), std::invalid_argument);
  CHECK_THROWS_AS(check_pyramid_size(0, 8), std::invalid_argument);
}

TEST_CASE("depth pyramid intersects child masks") {
  DepthMap d = DepthMap::constant(16, 16, 2.0);
  d.mask(0, 0) = false;
  d.values(0, 0) = 0;
  const auto pyr = build_depth_pyramid(d);
  CHECK_FALSE(pyr[1].mask(0, 0));
  CHECK(pyr[1].mask(0, 1));
  CHECK_FALSE(pyr[3].mask(0, 0));
  CHECK(pyr[3].mask(1, 1));
  CHECK(pyr[2].values(1, 1) == doctest::Approx(2.0));
  for (const auto& level : pyr) CHECK(level.satisfies_invariants());
}

TEST_CASE("from_values masks non-positive and non-finite values") {
  Plane<double> v(1, 4);
  v << 1.0, 0.0, -2.0, std::numeric_limits<double>::quiet_NaN();
  const DepthMap d = DepthMap::from_values(v);
  CHECK(d.mask(0, 0));
  CHECK_FALSE(d.mask(0, 1));
  CHECK_FALSE(d.mask(0, 2));
  CHECK_FALSE(d.mask(0, 3));
  CHECK(d.valid_count() == 1);
  CHECK(d.satisfies_invariants());
}

TEST_CASE("invert swaps depth and disparity") {
  Plane<double> v(1, 3);
  v << 2.0, 0.0, 0.5;
  const DepthMap inv = invert(DepthMap::from_values(v));
  CHECK(inv.values(0, 0) == doctest::Approx(0.5));
  CHECK_FALSE(inv.mask(0, 1));
  CHECK(inv.values(0, 2) == doctest::Approx(2.0));
}
