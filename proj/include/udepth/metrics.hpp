#pragma once

#include <string>
#include <vector>

#include "udepth/image.hpp"

namespace udepth {

struct MetricReport {
  double rmse = 0;
  double abs_rel = 0;
  double sq_rel = 0;
  double delta1 = 0;
  double delta2 = 0;
  double delta3 = 0;
  long n_pixels = 0;
  double scale_factor = 1;

  bool satisfies_invariants() const;
};

struct EvalOptions {
  /// pred <- pred * median(gt) / median(pred) over the evaluated pixels.
  bool median_scale = true;
  /// GT outside [min_depth, max_depth] is excluded; pred is clamped to it
  /// after scaling.
  double min_depth = 0.1;
  double max_depth = 10.0;
  /// Score GT-valid pixels whose prediction is missing as min_depth instead
  /// of skipping them.
  bool score_missing_pred = false;
};

/// RMSE, Abs Rel, Sq Rel and the three delta accuracies. Throws DataError on
/// size mismatch, non-positive values under a valid mask, or when no pixel
/// is left to evaluate.
MetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt, const EvalOptions& options);
MetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt, bool median_scale);

/// Mean of per-frame reports; n_pixels is summed.
MetricReport aggregate(const std::vector<MetricReport>& frames);

struct TableRow {
  std::string method;
  std::string dataset;
  MetricReport report;
};

/// Aligned text table: Method | Dataset | RMSE | Abs Rel | Sq Rel | d1 | d2 | d3.
std::string format_table(const std::vector<TableRow>& rows, int precision = 3);

}  // namespace udepth
