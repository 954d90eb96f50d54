#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "udepth/dataset.hpp"
#include "udepth/errors.hpp"
#include "udepth/image_io.hpp"
#include "udepth/metrics.hpp"
#include "udepth/optimizer.hpp"
#include "udepth/postproc.hpp"
#include "udepth/synthetic.hpp"

namespace fs = std::filesystem;

namespace udepth::cli {
namespace {

bool is_depth_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".dmap";
}

std::vector<fs::path> list_depth_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_depth_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no depth maps (.png or .dmap) in " + dir.string());
  return files;
}

// A single file or every depth map of a directory.
std::vector<fs::path> depth_inputs(const fs::path& p) {
  if (fs::is_directory(p)) return list_depth_files(p);
  if (!fs::exists(p)) throw DataError("no such file: " + p.string());
  return {p};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

nlohmann::json report_json(const MetricReport& r) {
  return {{"rmse", r.rmse},         {"abs_rel", r.abs_rel}, {"sq_rel", r.sq_rel},
          {"delta1", r.delta1},     {"delta2", r.delta2},   {"delta3", r.delta3},
          {"n_pixels", r.n_pixels}, {"scale_factor", r.scale_factor}};
}

EvalOptions eval_options(const EvalArgs& a) {
  EvalOptions o;
  o.median_scale = !a.no_median_scale;
  o.min_depth = a.min_depth;
  o.max_depth = a.max_depth;
  o.score_missing_pred = a.score_missing;
  if (!(o.min_depth > 0 && o.max_depth > o.min_depth))
    throw std::invalid_argument("depth cap must satisfy 0 < min-depth < max-depth");
  return o;
}

struct EvalSet {
  std::vector<fs::path> names;
  std::vector<DepthMap> pred;
  std::vector<DepthMap> gt;
};

EvalSet load_eval_set(const EvalArgs& a) {
  EvalSet s;
  const auto pred_files = list_depth_files(a.pred_dir);
  const auto gt_files = list_depth_files(a.gt_dir);
  if (pred_files.size() != gt_files.size()) {
    throw DataError(std::to_string(pred_files.size()) + " predictions in " + a.pred_dir + " but " +
                    std::to_string(gt_files.size()) + " ground-truth maps in " + a.gt_dir);
  }
  for (std::size_t i = 0; i < pred_files.size(); ++i) {
    s.names.push_back(pred_files[i].filename());
    s.pred.push_back(read_depth(pred_files[i], a.divisor));
    s.gt.push_back(read_depth(gt_files[i], a.divisor));
  }
  return s;
}

struct Evaluated {
  MetricReport aggregate;
  std::vector<MetricReport> frames;
};

Evaluated evaluate_set(const EvalSet& s, const EvalOptions& o, const FilterSpec* filter) {
  Evaluated e;
  for (std::size_t i = 0; i < s.pred.size(); ++i) {
    DepthMap pred = filter ? apply_filter(s.pred[i], *filter) : s.pred[i];
    pred = resize_nearest(pred, s.gt[i].width(), s.gt[i].height());
    try {
      e.frames.push_back(depth_metrics(pred, s.gt[i], o));
    } catch (const DataError& err) {
      throw DataError(s.names[i].string() + ": " + err.what());
    }
  }
  e.aggregate = aggregate(e.frames);
  return e;
}

DepthMap to_domain(const DepthMap& depth, bool disparity) { return disparity ? invert(depth) : depth; }

bool parse_domain(const std::string& d) {
  if (d == "disparity") return true;
  if (d == "depth") return false;
  throw std::invalid_argument("domain must be disparity or depth, got '" + d + "'");
}

RigidTransform scene_motion(const SceneArgs& s) {
  if (s.rotation_deg.size() != 3 || s.translation.size() != 3)
    throw std::invalid_argument("rotation and translation take three values each");
  RigidTransform t;
  t.rotation = Eigen::Vector3d(s.rotation_deg[0], s.rotation_deg[1], s.rotation_deg[2]) *
               (std::numbers::pi / 180.0);
  t.translation = Eigen::Vector3d(s.translation[0], s.translation[1], s.translation[2]);
  return t;
}

SyntheticScene build_scene(const SceneArgs& s) {
  SyntheticOptions o;
  o.width = s.width;
  o.height = s.height;
  o.profile = parse_profile(s.profile);
  o.motion = scene_motion(s);
  o.base_depth = s.base_depth;
  return make_synthetic_scene(s.seed, o);
}

std::string pose_text(const RigidTransform& t) {
  std::ostringstream os;
  os << std::setprecision(17);
  const Vector6d p = t.params();
  os << "# rx ry rz tx ty tz\n";
  for (int i = 0; i < 6; ++i) os << (i ? " " : "") << p(i);
  os << "\n# 4x4 matrix\n";
  const Eigen::Matrix4d m = t.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
  return os.str();
}

ImageBuffer mask_image(const Mask& m) {
  ImageBuffer img(static_cast<int>(m.cols()), static_cast<int>(m.rows()), 1);
  img.plane(0) = m.cast<double>().matrix();
  return img;
}

}  // namespace

int run_associate(const AssociateArgs& a) {
  const auto rgb = read_listing(a.rgb);
  const auto depth = read_listing(a.depth);
  const auto records = associate_frames(rgb, depth, a.max_dt);
  const std::string text = format_association(records);
  if (a.output.empty()) std::cout << text;
  else write_text(a.output, text);
  std::cerr << records.size() << " pairs from " << rgb.size() << " rgb and " << depth.size()
            << " depth frames\n";
  return kExitOk;
}

int run_eval(const EvalArgs& a) {
  const EvalOptions o = eval_options(a);
  const EvalSet set = load_eval_set(a);
  const Evaluated e = evaluate_set(set, o, nullptr);
  std::vector<TableRow> rows;
  if (a.per_frame)
    for (std::size_t i = 0; i < set.names.size(); ++i)
      rows.push_back({set.names[i].string(), a.dataset, e.frames[i]});
  rows.push_back({a.method, a.dataset, e.aggregate});
  std::cout << format_table(rows);
  if (!a.json_path.empty()) {
    nlohmann::json j = report_json(e.aggregate);
    j["method"] = a.method;
    j["dataset"] = a.dataset;
    j["frames"] = set.names.size();
    j["median_scale"] = o.median_scale;
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t i = 0; i < set.names.size(); ++i) {
      nlohmann::json f = report_json(e.frames[i]);
      f["file"] = set.names[i].string();
      frames.push_back(f);
    }
    j["per_frame"] = frames;
    write_text(a.json_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

int run_postprocess(const PostprocessArgs& a) {
  if (a.input.empty() || a.output.empty()) throw std::invalid_argument("--input and --output are required");
  const auto inputs = depth_inputs(a.input);
  std::vector<fs::path> second;
  if (a.mode == "elwf" || a.mode == "godard") {
    if (a.input_b.empty()) throw std::invalid_argument(a.mode + " needs --input-b");
    second = depth_inputs(a.input_b);
    if (second.size() != inputs.size()) {
      throw DataError(std::to_string(inputs.size()) + " maps in " + a.input + " but " +
                      std::to_string(second.size()) + " in " + a.input_b);
    }
  } else if (a.mode != "filter") {
    throw std::invalid_argument("mode must be elwf, godard or filter, got '" + a.mode + "'");
  }
  FilterSpec spec;
  if (a.mode == "filter") spec = FilterSpec::parse(a.filter + "-" + std::to_string(a.size));
  const bool disparity = parse_domain(a.domain);

  const bool to_dir = fs::is_directory(a.input);
  if (to_dir) fs::create_directories(a.output);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const DepthMap in = read_depth(inputs[i], a.divisor);
    DepthMap out;
    if (a.mode == "filter") {
      out = apply_filter(in, spec);
    } else {
      const DepthMap b = read_depth(second[i], a.divisor);
      const DepthMap da = to_domain(in, disparity);
      const DepthMap db = to_domain(b, disparity);
      DepthMap combined;
      if (a.mode == "elwf") {
        combined = elwf_combine(da, db);
      } else {
        const GodardResult g = godard_postprocess(da, db);
        if (g.fell_back)
          std::cerr << inputs[i].filename().string() << ": width " << in.width()
                    << " below 20, plain averaging used\n";
        combined = g.map;
      }
      out = to_domain(combined, disparity);
    }
    const fs::path target = to_dir ? fs::path(a.output) / inputs[i].filename() : fs::path(a.output);
    write_depth(target, out, a.divisor);
  }
  return kExitOk;
}

int run_optimize(const OptimizeArgs& a) {
  LossWeights weights{a.alpha, a.beta, a.gamma, a.omega};
  if (!weights.valid()) throw std::invalid_argument("loss weights must be finite and non-negative");

  PairProblem problem;
  std::optional<RigidTransform> gt_pose;
  if (!a.target.empty() || !a.source.empty()) {
    if (a.target.empty() || a.source.empty() || a.intrinsics.empty())
      throw std::invalid_argument("real pairs need --target, --source and --intrinsics");
    problem.target = read_image(a.target);
    problem.source = read_image(a.source);
    problem.intrinsics = load_intrinsics(a.intrinsics);
    if (!a.init_depth.empty()) {
      const DepthMap d = read_depth(a.init_depth, a.divisor);
      if (d.valid_count() != d.values.size()) throw DataError("initial depth must be valid everywhere");
      problem.disparity = invert(d).values;
    } else {
      if (!(a.init_depth_value > 0)) throw std::invalid_argument("--init-depth-value must be positive");
      problem.disparity =
          Plane<double>::Constant(problem.target.height(), problem.target.width(), 1.0 / a.init_depth_value);
    }
    if (!a.source_depth.empty()) problem.source_depth = read_depth(a.source_depth, a.divisor);
    if (a.init_pose.size() != 6) throw std::invalid_argument("--init-pose takes six values");
    Vector6d p;
    for (int i = 0; i < 6; ++i) p(i) = a.init_pose[i];
    problem.pose = RigidTransform::from_params(p);
    problem.weights = weights;
  } else {
    const SyntheticScene scene = build_scene(a.scene);
    gt_pose = scene.gt_pose;
    problem = problem_from_scene(scene, perturb_pose(scene.gt_pose, a.init_rot_deg, a.init_trans_frac), weights);
  }
  problem.strategy = parse_strategy(a.strategy);
  problem.two_d_level0_only = a.level0_only;

  OptimizerOptions opt;
  opt.steps = a.steps;
  opt.pose_lr = a.pose_lr;
  opt.disparity_lr = a.disparity_lr;
  opt.schedule = parse_schedule(a.schedule);
  if (!opt.valid()) throw std::invalid_argument("invalid optimizer settings (steps >= 1, rates >= 0)");

  const OptimizeResult r = optimize_pair(problem, opt);
  const std::string csv = trace_csv(r.trace);
  if (!a.trace.empty()) write_text(a.trace, csv);
  if (!a.output_dir.empty()) {
    fs::create_directories(a.output_dir);
    write_depth(fs::path(a.output_dir) / "depth.dmap", invert(DepthMap::from_values(r.disparity)));
    write_text(fs::path(a.output_dir) / "pose.txt", pose_text(r.pose));
    write_text(fs::path(a.output_dir) / "trace.csv", csv);
  }

  nlohmann::json summary;
  const double initial = r.trace.front().total;
  const double final_total = r.trace.back().total;
  summary["steps"] = static_cast<int>(r.trace.size()) - 1;
  summary["initial_total"] = initial;
  summary["final_total"] = final_total;
  summary["ratio"] = initial > 0 ? final_total / initial : 0.0;
  const Vector6d params = r.pose.params();
  summary["pose"] = std::vector<double>(params.data(), params.data() + 6);
  summary["diverged"] = r.diverged;
  if (r.stationary_step >= 0) summary["stationary_step"] = r.stationary_step;
  if (gt_pose) {
    summary["rotation_error_deg"] = rotation_error_deg(r.pose, *gt_pose);
    summary["translation_rel_error"] = translation_rel_error(r.pose, *gt_pose);
  }
  std::cout << summary.dump(2) << '\n';
  if (r.diverged) {
    std::cerr << r.message << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int run_filter_study(const FilterStudyArgs& a) {
  if (a.grid.empty()) throw std::invalid_argument("filter grid is empty");
  const EvalOptions o = eval_options(a.eval);
  const EvalSet set = load_eval_set(a.eval);
  std::vector<TableRow> rows;
  for (const auto& label : a.grid) {
    if (label == "none") {
      rows.push_back({"none", a.eval.dataset, evaluate_set(set, o, nullptr).aggregate});
    } else {
      const FilterSpec spec = FilterSpec::parse(label);
      rows.push_back({spec.label(), a.eval.dataset, evaluate_set(set, o, &spec).aggregate});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TableRow& x, const TableRow& y) { return x.report.rmse < y.report.rmse; });
  std::cout << format_table(rows);
  if (!a.eval.json_path.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json r = report_json(row.report);
      r["filter"] = row.method;
      r["dataset"] = row.dataset;
      j.push_back(r);
    }
    write_text(a.eval.json_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

int run_synth(const SynthArgs& a) {
  if (a.output_dir.empty()) throw std::invalid_argument("--output-dir is required");
  const SyntheticScene scene = build_scene(a.scene);
  const fs::path dir(a.output_dir);
  fs::create_directories(dir);
  write_image(dir / "target.png", scene.target);
  write_image(dir / "source.png", scene.source);
  write_image(dir / "target_mask.png", mask_image(scene.target_mask));
  write_depth(dir / "gt_depth.dmap", scene.gt_depth);
  write_depth(dir / "source_depth.dmap", scene.source_depth);
  save_intrinsics(dir / "intrinsics.txt", scene.intrinsics);
  write_text(dir / "pose.txt", pose_text(scene.gt_pose));
  std::cout << "wrote " << scene.target.width() << "x" << scene.target.height() << " "
            << to_string(parse_profile(a.scene.profile)) << " scene to " << dir.string()
            << " (in bounds " << scene.in_bounds_fraction << ")\n";
  return kExitOk;
}

}  // namespace udepth::cli
