#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace udepth::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct AssociateArgs {
  std::string rgb;
  std::string depth;
  std::string output;  // empty: stdout
  double max_dt = 0.02;
};

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string json_path;
  std::string method = "udepth";
  std::string dataset = "sequence";
  bool no_median_scale = false;
  bool score_missing = false;
  bool per_frame = false;
  double min_depth = 0.1;
  double max_depth = 10.0;
  double divisor = 5000.0;
};

struct PostprocessArgs {
  std::string mode = "filter";  // elwf | godard | filter
  std::string input;
  std::string input_b;
  std::string output;
  std::string filter = "median";
  int size = 35;
  std::string domain = "disparity";  // elwf / godard: disparity | depth
  double divisor = 5000.0;
};

struct SceneArgs {
  std::string profile = "slant";
  int width = 64;
  int height = 48;
  std::uint64_t seed = 7;
  std::vector<double> rotation_deg = {1.0, -1.5, 0.5};
  std::vector<double> translation = {0.08, -0.03, 0.05};
  double base_depth = 2.0;
};

struct OptimizeArgs {
  SceneArgs scene;
  // Real pairs instead of a synthetic scene.
  std::string target;
  std::string source;
  std::string intrinsics;
  std::string source_depth;
  std::string init_depth;
  double init_depth_value = 2.0;
  std::vector<double> init_pose = {0, 0, 0, 0, 0, 0};
  double divisor = 5000.0;

  double init_rot_deg = 2.0;
  double init_trans_frac = 0.05;

  double alpha = 0.85;
  double beta = 0.15;
  double gamma = 0.15;
  double omega = 0.1;
  std::string strategy = "B";
  bool level0_only = false;

  int steps = 500;
  double pose_lr = 2e-3;
  double disparity_lr = 2e-4;
  std::string schedule = "cosine";

  std::string trace;
  std::string output_dir;
};

struct FilterStudyArgs {
  EvalArgs eval;
  std::vector<std::string> grid = {"none", "max-15", "median-35", "median-55"};
};

struct SynthArgs {
  SceneArgs scene;
  std::string output_dir;
};

int run_associate(const AssociateArgs& args);
int run_eval(const EvalArgs& args);
int run_postprocess(const PostprocessArgs& args);
int run_optimize(const OptimizeArgs& args);
int run_filter_study(const FilterStudyArgs& args);
int run_synth(const SynthArgs& args);

}  // namespace udepth::cli
