#include <filesystem>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "udepth/errors.hpp"

using namespace udepth::cli;

namespace {

void add_eval_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--pred-dir", a.pred_dir, "Directory of predicted depth maps")->required();
  cmd->add_option("--gt-dir", a.gt_dir, "Directory of ground-truth depth maps")->required();
  cmd->add_option("--json", a.json_path, "Write a JSON report here");
  cmd->add_option("--method", a.method, "Method name for the table")->capture_default_str();
  cmd->add_option("--dataset", a.dataset, "Dataset name for the table")->capture_default_str();
  cmd->add_flag("--no-median-scale", a.no_median_scale, "Disable median scaling");
  cmd->add_flag("--score-missing", a.score_missing,
                "Score GT pixels without a prediction at min-depth");
  cmd->add_flag("--per-frame", a.per_frame, "Add one table row per frame");
  cmd->add_option("--min-depth", a.min_depth, "Lower depth cap (m)")->capture_default_str();
  cmd->add_option("--max-depth", a.max_depth, "Upper depth cap (m)")->capture_default_str();
  cmd->add_option("--depth-divisor", a.divisor, "16-bit PNG depth divisor")->capture_default_str();
}

void add_scene_options(CLI::App* cmd, SceneArgs& s) {
  cmd->add_option("--profile", s.profile, "plane, slant or steps")->capture_default_str();
  cmd->add_option("--width", s.width, "Image width")->capture_default_str();
  cmd->add_option("--height", s.height, "Image height")->capture_default_str();
  cmd->add_option("--seed", s.seed, "Texture seed")->capture_default_str();
  cmd->add_option("--rotation", s.rotation_deg, "Ground-truth rotation vector (degrees)")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--translation", s.translation, "Ground-truth translation (m)")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--base-depth", s.base_depth, "Scene depth scale (m)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised depth toolkit: warping losses, post-processing, metrics, TUM tooling"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON file with option values; flags win");
  };

  AssociateArgs assoc;
  auto* c_assoc = app.add_subcommand("associate", "Pair RGB and depth listings by timestamp");
  c_assoc->add_option("--rgb", assoc.rgb, "rgb.txt listing")->required();
  c_assoc->add_option("--depth", assoc.depth, "depth.txt listing")->required();
  c_assoc->add_option("--max-dt", assoc.max_dt, "Maximum timestamp difference (s)")->capture_default_str();
  c_assoc->add_option("-o,--output", assoc.output, "Output file (default stdout)");
  add_config(c_assoc);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Depth metrics of predictions against ground truth");
  add_eval_options(c_eval, eval);
  add_config(c_eval);

  PostprocessArgs post;
  auto* c_post = app.add_subcommand("postprocess", "ELWF, Godard blending or median/max filtering");
  c_post->add_option("--mode", post.mode, "elwf, godard or filter")->capture_default_str();
  c_post->add_option("--input", post.input, "Depth map or directory");
  c_post->add_option("--input-b", post.input_b, "Second map or directory (elwf, godard)");
  c_post->add_option("-o,--output", post.output, "Output map or directory");
  c_post->add_option("--filter", post.filter, "median or max")->capture_default_str();
  c_post->add_option("--size", post.size, "Odd window size")->capture_default_str();
  c_post->add_option("--domain", post.domain, "Combine in disparity or depth")->capture_default_str();
  c_post->add_option("--depth-divisor", post.divisor, "16-bit PNG depth divisor")->capture_default_str();
  add_config(c_post);

  OptimizeArgs opt;
  auto* c_opt = app.add_subcommand("optimize", "Recover depth and pose of one pair by gradient descent");
  add_scene_options(c_opt, opt.scene);
  c_opt->add_option("--target", opt.target, "Target image (real pair)");
  c_opt->add_option("--source", opt.source, "Source image (real pair)");
  c_opt->add_option("--intrinsics", opt.intrinsics, "Intrinsics file (real pair)");
  c_opt->add_option("--source-depth", opt.source_depth, "Source-frame depth for the 3D term");
  c_opt->add_option("--init-depth", opt.init_depth, "Initial target depth map");
  c_opt->add_option("--init-depth-value", opt.init_depth_value, "Constant initial depth (m)")
      ->capture_default_str();
  c_opt->add_option("--init-pose", opt.init_pose, "Initial pose rx ry rz tx ty tz")->expected(6);
  c_opt->add_option("--depth-divisor", opt.divisor, "16-bit PNG depth divisor")->capture_default_str();
  c_opt->add_option("--init-rot-deg", opt.init_rot_deg, "Synthetic: initial rotation error (deg)")
      ->capture_default_str();
  c_opt->add_option("--init-trans-frac", opt.init_trans_frac,
                    "Synthetic: initial translation error (fraction of |t|)")
      ->capture_default_str();
  c_opt->add_option("--alpha", opt.alpha, "Reconstruction weight")->capture_default_str();
  c_opt->add_option("--beta", opt.beta, "SSIM weight")->capture_default_str();
  c_opt->add_option("--gamma", opt.gamma, "Smoothness weight")->capture_default_str();
  c_opt->add_option("--omega", opt.omega, "3D loss weight")->capture_default_str();
  c_opt->add_option("--strategy", opt.strategy, "Multi-scale strategy A or B")->capture_default_str();
  c_opt->add_flag("--level0-only", opt.level0_only, "2D losses at level 0 only");
  c_opt->add_option("--steps", opt.steps, "Optimizer steps")->capture_default_str();
  c_opt->add_option("--pose-lr", opt.pose_lr, "Adam step for pose")->capture_default_str();
  c_opt->add_option("--disparity-lr", opt.disparity_lr, "Adam step for disparity")->capture_default_str();
  c_opt->add_option("--schedule", opt.schedule, "cosine or constant")->capture_default_str();
  c_opt->add_option("--trace", opt.trace, "Write the loss trace CSV here");
  c_opt->add_option("--output-dir", opt.output_dir, "Write depth.dmap, pose.txt, trace.csv here");
  add_config(c_opt);

  FilterStudyArgs study;
  auto* c_study = app.add_subcommand("filter-study", "Rank filter configurations by RMSE");
  add_eval_options(c_study, study.eval);
  c_study->add_option("--grid", study.grid, "Filter labels: none, median-N, max-N")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',')
      ->capture_default_str();
  add_config(c_study);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Render a synthetic frame pair with ground truth");
  add_scene_options(c_synth, synth.scene);
  c_synth->add_option("--output-dir", synth.output_dir, "Output directory");
  add_config(c_synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(*cmd, load_config(config_path));
    if (cmd == c_assoc) return run_associate(assoc);
    if (cmd == c_eval) return run_eval(eval);
    if (cmd == c_post) return run_postprocess(post);
    if (cmd == c_opt) return run_optimize(opt);
    if (cmd == c_study) return run_filter_study(study);
    return run_synth(synth);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const udepth::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
