#pragma once

#include <string>

#include "udepth/image.hpp"

namespace udepth {

enum class FilterKind { kMedian, kMax };

/// Sliding-window filter; `size` is the odd window side in pixels.
struct FilterSpec {
  FilterKind kind = FilterKind::kMedian;
  int size = 35;

  bool valid() const { return size >= 3 && size % 2 == 1; }
  /// "median-35", "max-15".
  std::string label() const;
  /// Parses a label as produced by label(); throws std::invalid_argument.
  static FilterSpec parse(const std::string& label);
};

/// Ensemble of the unflipped-model map and the flipped-model map (still in
/// the flipped image domain): (a + flip(b)) / 2, masks intersected.
DepthMap elwf_combine(const DepthMap& a, const DepthMap& b_flipped_domain);

struct GodardResult {
  DepthMap map;
  int edge_columns = 0;
  bool fell_back = false;  // width < 20: plain averaging
};

/// Left ceil(5% * W) columns from `disp`, right ceil(5% * W) columns from
/// `disp_from_flipped` (already flipped back), the rest averaged.
GodardResult godard_postprocess(const DepthMap& disp, const DepthMap& disp_from_flipped);

/// Median (lower middle for even counts) or max over the valid pixels of
/// the window, with replicate padding. A pixel is invalid only when its
/// whole window is.
DepthMap apply_filter(const DepthMap& depth, const FilterSpec& spec);

}  // namespace udepth
