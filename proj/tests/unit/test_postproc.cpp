#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "udepth/postproc.hpp"

using namespace udepth;

namespace {

DepthMap random_map(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 5.0);
  Plane<double> v(h, w);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
  return DepthMap::from_values(v);
}

DepthMap read_grid(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  int w = 0, h = 0;
  in >> w >> h;
  Plane<double> v(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) in >> v(y, x);
  return DepthMap::from_values(v);
}

}  // namespace

TEST_CASE("ELWF examples") {
  const DepthMap a = random_map(9, 6, 1);
  const DepthMap same = elwf_combine(a, flip_horizontal(a));
  CHECK((same.values.array() == a.values.array()).all());

  const DepthMap c = elwf_combine(DepthMap::constant(5, 4, 1.0), DepthMap::constant(5, 4, 3.0));
  CHECK((c.values.array() == 2.0).all());

  DepthMap holed = a;
  holed.mask(2, 3) = false;
  holed.values(2, 3) = 0;
  CHECK_FALSE(elwf_combine(holed, flip_horizontal(a)).mask(2, 3));
  CHECK_FALSE(elwf_combine(a, flip_horizontal(holed)).mask(2, 3));

  const DepthMap b = random_map(9, 6, 2);
  const DepthMap ab = elwf_combine(a, b);
  const DepthMap ba = elwf_combine(flip_horizontal(b), flip_horizontal(a));
  CHECK(ab.values.isApprox(ba.values, 1e-15));

  CHECK_THROWS_AS(elwf_combine(a, random_map(8, 6, 3)), std::invalid_argument);
}

TEST_CASE("Godard post-processing") {
  const DepthMap a = random_map(40, 5, 4);
  const GodardResult id = godard_postprocess(a, a);
  CHECK((id.map.values.array() == a.values.array()).all());
  CHECK(id.edge_columns == 2);

  const GodardResult r = godard_postprocess(DepthMap::constant(20, 3, 1.0), DepthMap::constant(20, 3, 2.0));
  CHECK_FALSE(r.fell_back);
  CHECK(r.edge_columns == 1);
  CHECK((r.map.values.col(0).array() == 1.0).all());
  CHECK((r.map.values.col(19).array() == 2.0).all());
  CHECK((r.map.values.middleCols(1, 18).array() == 1.5).all());

  CHECK(godard_postprocess(DepthMap::constant(21, 3, 1.0), DepthMap::constant(21, 3, 2.0)).edge_columns == 2);

  const GodardResult narrow = godard_postprocess(DepthMap::constant(19, 3, 1.0), DepthMap::constant(19, 3, 2.0));
  CHECK(narrow.fell_back);
  CHECK((narrow.map.values.array() == 1.5).all());
}

TEST_CASE("filter spec labels") {
  const FilterSpec m = FilterSpec::parse("median-35");
  CHECK(m.kind == FilterKind::kMedian);
  CHECK(m.size == 35);
  CHECK(FilterSpec::parse("max-15").label() == "max-15");
  CHECK_THROWS_AS(FilterSpec::parse("median-4"), std::invalid_argument);
  CHECK_THROWS_AS(FilterSpec::parse("mean-3"), std::invalid_argument);
  CHECK_THROWS_AS(FilterSpec::parse("median-3x"), std::invalid_argument);
  CHECK_THROWS_AS(apply_filter(random_map(4, 4, 1), FilterSpec{FilterKind::kMax, 1}), std::invalid_argument);
}

TEST_CASE("constant maps are unchanged and holes are filled") {
  const DepthMap c = DepthMap::constant(12, 9, 2.5);
  for (const char* label : {"median-3", "median-35", "max-5"})
    CHECK((apply_filter(c, FilterSpec::parse(label)).values.array() == 2.5).all());

  DepthMap hole = c;
  hole.values(4, 4) = 0;
  hole.mask(4, 4) = false;
  const DepthMap f = apply_filter(hole, FilterSpec::parse("median-3"));
  CHECK(f.mask(4, 4));
  CHECK(f.values(4, 4) == 2.5);

  const DepthMap empty = DepthMap::from_values(Plane<double>::Zero(5, 5));
  CHECK(apply_filter(empty, FilterSpec::parse("median-3")).valid_count() == 0);
}

TEST_CASE("median filter equals a sort-and-pick oracle") {
  DepthMap m = random_map(32, 32, 5);
  std::mt19937 rng(6);
  std::uniform_int_distribution<int> pix(0, 32 * 32 - 1);
  for (int i = 0; i < 60; ++i) {
    const int p = pix(rng);
    m.values.data()[p] = 0;
    m.mask.data()[p] = false;
  }
  const DepthMap f = apply_filter(m, FilterSpec{FilterKind::kMedian, 5});
  const DepthMap mx = apply_filter(m, FilterSpec{FilterKind::kMax, 5});
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      std::vector<double> w;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const int yy = std::clamp(y + dy, 0, 31), xx = std::clamp(x + dx, 0, 31);
          if (m.mask(yy, xx)) w.push_back(m.values(yy, xx));
        }
      std::sort(w.begin(), w.end());
      REQUIRE_FALSE(w.empty());
      CHECK(f.values(y, x) == w[(w.size() - 1) / 2]);
      CHECK(mx.values(y, x) == w.back());
    }
  }
  CHECK(f.values.maxCoeff() <= m.values.maxCoeff());
  CHECK(f.values.minCoeff() >= m.mask.select(m.values.array(), 1e9).minCoeff());
}

TEST_CASE("even valid counts take the lower middle") {
  Plane<double> v = Plane<double>::Zero(1, 3);
  v << 1.0, 0.0, 4.0;
  const DepthMap f = apply_filter(DepthMap::from_values(v), FilterSpec{FilterKind::kMedian, 3});
  CHECK(f.values(0, 1) == 1.0);
}

TEST_CASE("median-35 golden output") {
  const DepthMap input = read_grid(UDEPTH_TEST_DATA "/median35_input.txt");
  const DepthMap golden = read_grid(UDEPTH_TEST_DATA "/median35_golden.txt");
  const DepthMap out = apply_filter(input, FilterSpec::parse("median-35"));
  CHECK((out.mask == golden.mask).all());
  CHECK((out.values - golden.values).cwiseAbs().maxCoeff() <= 1e-12);
}
