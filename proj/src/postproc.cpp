#include "udepth/postproc.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace udepth {
namespace {

void check_same(const DepthMap& a, const DepthMap& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": map sizes differ (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

}  // namespace

std::string FilterSpec::label() const {
  return std::string(kind == FilterKind::kMedian ? "median" : "max") + "-" + std::to_string(size);
}

FilterSpec FilterSpec::parse(const std::string& label) {
  const auto dash = label.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("filter '" + label + "': expected kind-size");
  FilterSpec spec;
  const std::string kind = label.substr(0, dash);
  if (kind == "median") spec.kind = FilterKind::kMedian;
  else if (kind == "max") spec.kind = FilterKind::kMax;
  else throw std::invalid_argument("filter '" + label + "': kind must be median or max");
  try {
    std::size_t used = 0;
    spec.size = std::stoi(label.substr(dash + 1), &used);
    if (used != label.size() - dash - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("filter '" + label + "': bad size");
  }
  if (!spec.valid()) throw std::invalid_argument("filter '" + label + "': size must be odd and >= 3");
  return spec;
}

DepthMap elwf_combine(const DepthMap& a, const DepthMap& b_flipped_domain) {
  check_same(a, b_flipped_domain, "elwf_combine");
  const DepthMap b = flip_horizontal(b_flipped_domain);
  Mask mask = a.mask && b.mask;
  Plane<double> values = mask.select((a.values.array() + b.values.array()) * 0.5, 0.0).matrix();
  return DepthMap(std::move(values), std::move(mask));
}

GodardResult godard_postprocess(const DepthMap& disp, const DepthMap& disp_from_flipped) {
  check_same(disp, disp_from_flipped, "godard_postprocess");
  const int w = disp.width();
  GodardResult out;
  out.fell_back = w < 20;
  out.edge_columns = out.fell_back ? 0 : (w + 19) / 20;
  Mask mask = disp.mask && disp_from_flipped.mask;
  Plane<double> values =
      mask.select((disp.values.array() + disp_from_flipped.values.array()) * 0.5, 0.0).matrix();
  const int e = out.edge_columns;
  if (e > 0) {
    values.leftCols(e) = disp.values.leftCols(e);
    mask.leftCols(e) = disp.mask.leftCols(e);
    values.rightCols(e) = disp_from_flipped.values.rightCols(e);
    mask.rightCols(e) = disp_from_flipped.mask.rightCols(e);
  }
  out.map = DepthMap(std::move(values), std::move(mask));
  return out;
}

DepthMap apply_filter(const DepthMap& depth, const FilterSpec& spec) {
  if (!spec.valid()) throw std::invalid_argument("apply_filter: window size must be odd and >= 3");
  const int h = depth.height();
  const int w = depth.width();
  const int r = spec.size / 2;
  Plane<double> values = Plane<double>::Zero(h, w);
  Mask mask = Mask::Constant(h, w, false);
  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(spec.size * spec.size));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      window.clear();
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          if (depth.mask(yy, xx)) window.push_back(depth.values(yy, xx));
        }
      }
      if (window.empty()) continue;
      mask(y, x) = true;
      if (spec.kind == FilterKind::kMax) {
        values(y, x) = *std::max_element(window.begin(), window.end());
      } else {
        const auto mid = window.begin() + static_cast<std::ptrdiff_t>((window.size() - 1) / 2);
        std::nth_element(window.begin(), mid, window.end());
        values(y, x) = *mid;
      }
    }
  }
  return DepthMap(std::move(values), std::move(mask));
}

}  // namespace udepth
