// Acceptance checks; one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "support/grad_check.hpp"
#include "support/scenes.hpp"
#include "udepth/dataset.hpp"
#include "udepth/icp.hpp"
#include "udepth/image_io.hpp"
#include "udepth/metrics.hpp"
#include "udepth/multiscale.hpp"
#include "udepth/optimizer.hpp"
#include "udepth/postproc.hpp"

using namespace udepth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  LossWeights w;
  w.omega = 0;
  testing::GradCheckStats total;
  int scenes = 0;
  for (int i = 0; i < 50; ++i) {
    const SyntheticScene scene = testing::random_scene(rng, 16, 16);
    for (LossStrategy s : {LossStrategy::kA, LossStrategy::kB}) {
      const PairProblem p = testing::perturbed_problem(rng, scene, s, w);
      const auto stats = testing::check_problem_gradient(p);
      total.components += stats.components;
      total.failures += stats.failures;
      total.shifted += stats.shifted;
      total.refined += stats.refined;
      total.max_rel = std::max(total.max_rel, stats.max_rel);
    }
    ++scenes;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = total.failures == 0 && secs < 60;
  o.detail = fmt("%d scenes x 2 strategies, h = 1e-5: %d components, %d failures, %d passed with h/10 or "
                 "h/100, %d at shifted points, max rel err %.2e, %.1f s",
                 scenes, total.components, total.failures, total.refined, total.shifted, total.max_rel,
                 secs);
  return o;
}

Outcome warp_identity_round_trip() {
  std::mt19937_64 rng(7);
  bool identity_exact = true;
  double worst = 0;
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    const SyntheticScene scene = testing::random_scene(rng, 64, 48);
    const FlowField id = warp_coords(scene.gt_depth, RigidTransform::identity(), scene.intrinsics);
    for (int y = 0; y < id.height(); ++y)
      for (int x = 0; x < id.width(); ++x)
        identity_exact = identity_exact && id.valid(y, x) && id.u(y, x) == x && id.v(y, x) == y;

    const FlowField fwd = warp_coords(scene.gt_depth, scene.gt_pose, scene.intrinsics,
                                      std::make_pair(1 << 20, 1 << 20));
    const FlowField back = inverse_warp_coords(fwd, scene.gt_pose, scene.intrinsics);
    for (int y = 0; y < fwd.height(); ++y)
      for (int x = 0; x < fwd.width(); ++x) {
        if (!back.valid(y, x)) {
          worst = 1e300;
          continue;
        }
        worst = std::max({worst, std::abs(back.u(y, x) - x), std::abs(back.v(y, x) - y)});
        ++checked;
      }
  }
  return {identity_exact && worst <= 1e-6,
          fmt("identity grid exact: %s; round trip max error %.2e px over %d pixels",
              identity_exact ? "yes" : "no", worst, checked)};
}

Outcome icp_recovery() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(100, 1000);
  double worst = 0;
  int trials = 0;
  for (int i = 0; i < 20; ++i) {
    PointCloud src;
    src.points.resize(3, count(rng));
    for (Eigen::Index j = 0; j < src.points.cols(); ++j)
      src.points.col(j) = Eigen::Vector3d(u(rng), u(rng), 0.5 * u(rng)) + Eigen::Vector3d(0, 0, 3);
    Eigen::Vector3d axis(u(rng), u(rng), u(rng));
    axis.normalize();
    const double angle = 0.1 * (0.5 + 0.5 * u(rng));
    RigidTransform gt;
    gt.rotation = axis * angle;
    gt.translation = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.05;
    PointCloud dst;
    dst.points = (gt.rotation_matrix() * src.points).colwise() + gt.translation;
    IcpOptions opt;
    opt.max_iterations = 100;
    const IcpResult r = icp_align(src, dst, opt);
    worst = std::max(worst, (r.matrix - gt.matrix()).cwiseAbs().maxCoeff());
    ++trials;
  }
  PointCloud same;
  same.points = Eigen::Matrix3Xd::Random(3, 300);
  const double zero_loss = icp_3d_loss(icp_align(same, same));
  return {worst <= 1e-6 && zero_loss == 0.0,
          fmt("%d clouds, max transform error %.2e; loss at perfect alignment %.1e", trials, worst,
              zero_loss)};
}

Outcome direct_optimization() {
  const auto t0 = Clock::now();
  SyntheticOptions o;
  o.width = 64;
  o.height = 48;
  o.profile = DepthProfile::kSlant;
  o.motion.rotation = Eigen::Vector3d(1.0, -1.5, 0.5) * (3.14159265358979323846 / 180.0);
  o.motion.translation = Eigen::Vector3d(0.08, -0.03, 0.05);
  const SyntheticScene scene = make_synthetic_scene(7, o);
  const PairProblem p = problem_from_scene(scene, perturb_pose(scene.gt_pose, 2.0, 0.05));
  OptimizerOptions opt;
  opt.steps = 500;
  const OptimizeResult r = optimize_pair(p, opt);
  const double ratio = r.trace.back().total / r.trace.front().total;
  const double rot = rotation_error_deg(r.pose, scene.gt_pose);
  const double trans = translation_rel_error(r.pose, scene.gt_pose);
  const double secs = seconds_since(t0);
  return {!r.diverged && ratio < 0.1 && rot <= 0.2 && trans <= 0.02 && secs < 300,
          fmt("loss ratio %.4f after %zu steps, rotation error %.4f deg, translation error %.2f%%, %.1f s",
              ratio, r.trace.size() - 1, rot, 100 * trans, secs)};
}

Outcome filtering_effect() {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EvalOptions eo;
  eo.median_scale = false;
  eo.score_missing_pred = true;
  int maps = 0;
  int checks = 0;
  int failures = 0;
  double worst_fraction = 1e300;
  for (int i = 0; i < 20; ++i) {
    SyntheticOptions so;
    so.width = 128;
    so.height = 96;
    so.profile = static_cast<DepthProfile>(i % 3);
    so.base_depth = 1.5 + 2.0 * u(rng);
    const DepthMap gt = make_synthetic_scene(rng(), so).gt_depth;
    DepthMap corrupted = gt;
    const auto n = static_cast<int>(gt.values.size());
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int k = 0; k < n / 100; ++k) {
      corrupted.values.data()[idx[k]] = 0;
      corrupted.mask.data()[idx[k]] = false;
    }
    const double clean = depth_metrics(gt, gt, eo).rmse;
    const double none = depth_metrics(corrupted, gt, eo).rmse;
    const double injected = none - clean;
    for (int size = 3; size <= 35; size += 2) {
      const double filtered = depth_metrics(apply_filter(corrupted, {FilterKind::kMedian, size}), gt, eo).rmse;
      const double fraction = (none - filtered) / injected;
      worst_fraction = std::min(worst_fraction, fraction);
      ++checks;
      if (!(filtered < none && fraction >= 0.5)) ++failures;
    }
    ++maps;
  }
  return {failures == 0,
          fmt("%d maps x 17 median sizes (3..35): %d/%d reduce RMSE by >= 50%% of the hole contribution; "
              "smallest reduction %.1f%%",
              maps, checks - failures, checks, 100 * worst_fraction)};
}

Outcome elwf_algebra() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  Plane<double> v(24, 31);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
  const DepthMap a = DepthMap::from_values(v);
  const DepthMap self = elwf_combine(a, flip_horizontal(a));
  const bool bit_exact = (self.values.array() == a.values.array()).all() && (self.mask == a.mask).all();

  const DepthMap c = elwf_combine(DepthMap::constant(31, 24, 1.0), DepthMap::constant(31, 24, 3.0));
  const bool mean_ok = (c.values.array() == 2.0).all() && c.mask.all();

  const GodardResult g = godard_postprocess(DepthMap::constant(20, 6, 1.0), DepthMap::constant(20, 6, 4.0));
  bool godard_ok = g.edge_columns == 1 && !g.fell_back;
  for (int y = 0; y < 6; ++y) {
    godard_ok = godard_ok && g.map.values(y, 0) == 1.0 && g.map.values(y, 19) == 4.0;
    for (int x = 1; x <= 18; ++x) godard_ok = godard_ok && g.map.values(y, x) == 2.5;
  }
  return {bit_exact && mean_ok && godard_ok,
          fmt("combine(a, flip(a)) == a: %s; constant mean: %s; 20-column Godard rule: %s",
              bit_exact ? "yes" : "no", mean_ok ? "yes" : "no", godard_ok ? "yes" : "no")};
}

Outcome metrics_closed_forms() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  Plane<double> g(30, 40);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = u(rng);
  const DepthMap gt = DepthMap::from_values(g);
  const MetricReport doubled = depth_metrics(DepthMap::from_values(2.0 * g), gt, false);
  const bool doubled_ok = doubled.abs_rel == 1.0 && doubled.delta1 == 0 && doubled.delta2 == 0 &&
                          doubled.delta3 == 0;
  bool scaled_ok = true;
  double worst = 0;
  for (double c : {0.01, 0.37, 1.0, 2.0, 9.5, 250.0}) {
    const MetricReport r = depth_metrics(DepthMap::from_values(c * g), gt, true);
    worst = std::max({worst, r.rmse, r.abs_rel, r.sq_rel});
    scaled_ok = scaled_ok && r.delta1 == 1.0 && r.delta2 == 1.0 && r.delta3 == 1.0;
  }
  scaled_ok = scaled_ok && worst <= 1e-12;
  return {doubled_ok && scaled_ok,
          fmt("pred = 2 gt: abs_rel %.17g, deltas %g/%g/%g; median-scaled c*gt max error %.1e",
              doubled.abs_rel, doubled.delta1, doubled.delta2, doubled.delta3, worst)};
}

Outcome multiscale_equivalence() {
  std::mt19937_64 rng(31);
  double level0_gap = 0;
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const SyntheticScene scene = testing::random_scene(rng, 64, 48);
    const PairProblem p = testing::perturbed_problem(rng, scene, LossStrategy::kB, {});
    const auto disp = build_pyramid(p.disparity);
    MultiscaleOptions a;
    a.strategy = LossStrategy::kA;
    MultiscaleOptions b;
    b.strategy = LossStrategy::kB;
    const Mask* mask = &*p.target_mask;
    const MultiscaleResult ra = multiscale_losses(p.target, p.source, disp, p.pose, p.intrinsics, a, mask);
    const MultiscaleResult rb = multiscale_losses(p.target, p.source, disp, p.pose, p.intrinsics, b, mask);
    level0_gap = std::max({level0_gap, std::abs(ra.levels[0].reconstr - rb.levels[0].reconstr),
                           std::abs(ra.levels[0].ssim - rb.levels[0].ssim)});
    for (int s = 0; s < kPyramidLevels; ++s) {
      const Plane<double> up = resize_bilinear(disp[s], p.target.width(), p.target.height());
      const DepthMap depth = invert(DepthMap::from_values(up));
      const FlowField flow = warp_coords(depth, p.pose, p.intrinsics);
      SampleResult warped = bilinear_sample(p.source, flow);
      warped.mask = warped.mask && *mask;
      for (int c = 0; c < warped.image.channels(); ++c)
        warped.image.plane(c) = warped.mask.select(warped.image.plane(c).array(), 0.0).matrix();
      const double rec = reconstruction_loss(p.target, warped).value;
      const double sim = ssim_loss(p.target, warped, SsimParams{}).value;
      worst = std::max({worst, std::abs(rec - rb.levels[s].reconstr), std::abs(sim - rb.levels[s].ssim)});
    }
  }
  return {level0_gap == 0.0 && worst <= 1e-10,
          fmt("A vs B level-0 max difference %.1e; B vs upsample-then-warp max difference %.1e", level0_gap,
              worst)};
}

Outcome dataset_round_trip(const fs::path& data, const fs::path& tmp) {
  const auto rgb = read_listing(data / "tum" / "rgb.txt");
  const auto depth = read_listing(data / "tum" / "depth.txt");
  const std::string first = format_association(associate_frames(rgb, depth, 0.02));
  const std::string second = format_association(associate_frames(rgb, depth, 0.02));
  std::ifstream golden_in(data / "tum" / "association.txt");
  std::stringstream golden;
  golden << golden_in.rdbuf();
  const bool assoc_ok = first == second && first == golden.str();

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> raw_value(0, 65535);
  RawDepth raw(37, 53);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = static_cast<std::uint16_t>(raw_value(rng));
  raw(0, 0) = 0;
  raw(0, 1) = 65535;
  write_png16(tmp / "raw.png", raw);
  const DepthMap loaded = load_depth_png(tmp / "raw.png");
  save_depth_png(tmp / "resaved.png", loaded);
  const bool png_ok = (read_png16(tmp / "resaved.png").array() == raw.array()).all();

  const auto records = read_association(data / "tum" / "association.txt");
  SequenceConfig cfg;
  const Split s1 = subsample_and_split(records, cfg, 8);
  const Split s2 = subsample_and_split(records, cfg, 8);
  bool split_ok = format_association(s1.train) == format_association(s2.train) &&
                  format_association(s1.test) == format_association(s2.test) &&
                  s1.train.size() + s1.test.size() == records.size();
  for (const auto& t : s1.train)
    for (const auto& u : s1.test) split_ok = split_ok && t.timestamp != u.timestamp;
  return {assoc_ok && png_ok && split_ok,
          fmt("association %zu pairs deterministic and matches fixture: %s; 16-bit PNG round trip: %s; "
              "stride-5 split %zu/%zu reproducible and disjoint: %s",
              records.size(), assoc_ok ? "yes" : "no", png_ok ? "yes" : "no", s1.train.size(),
              s1.test.size(), split_ok ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path data = argc > 1 ? fs::path(argv[1]) : fs::path(UDEPTH_TEST_DATA);
  const fs::path tmp = fs::temp_directory_path() / ("udepth_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"warp identity and round trip", warp_identity_round_trip},
      {"ICP recovery", icp_recovery},
      {"direct optimization recovery", direct_optimization},
      {"filtering effect direction", filtering_effect},
      {"ELWF algebra", elwf_algebra},
      {"metrics closed forms", metrics_closed_forms},
      {"multi-scale strategy equivalence", multiscale_equivalence},
      {"dataset round trip", [&] { return dataset_round_trip(data, tmp); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  fs::remove_all(tmp);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
