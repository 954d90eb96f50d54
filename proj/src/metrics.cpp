#include "udepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "udepth/errors.hpp"

namespace udepth {
namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_map(const DepthMap& m, const char* name) {
  if (m.mask.rows() != m.values.rows() || m.mask.cols() != m.values.cols())
    throw DataError(std::string("depth_metrics: ") + name + " mask size differs from values");
  if (!m.satisfies_invariants())
    throw DataError(std::string("depth_metrics: ") + name +
                    " has non-positive or non-finite values under its valid mask");
}

// Display width in terminal columns, counting UTF-8 code points.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  const std::size_t w = display_width(s);
  if (w >= width) return s;
  const std::string fill(width - w, ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

bool MetricReport::satisfies_invariants() const {
  for (double v : {rmse, abs_rel, sq_rel, delta1, delta2, delta3, scale_factor})
    if (!std::isfinite(v)) return false;
  for (double d : {delta1, delta2, delta3})
    if (d < 0 || d > 1) return false;
  return delta1 <= delta2 && delta2 <= delta3 && rmse >= 0 && abs_rel >= 0 && sq_rel >= 0 &&
         n_pixels > 0;
}

MetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt, bool median_scale) {
  EvalOptions options;
  options.median_scale = median_scale;
  return depth_metrics(pred, gt, options);
}

MetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt, const EvalOptions& options) {
  if (!pred.same_shape(gt)) {
    throw DataError("depth_metrics: prediction is " + std::to_string(pred.width()) + "x" +
                    std::to_string(pred.height()) + ", ground truth is " +
                    std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
  }
  check_map(pred, "prediction");
  check_map(gt, "ground truth");

  std::vector<double> p;
  std::vector<double> g;
  std::vector<bool> missing;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!gt.mask(y, x)) continue;
      const double gv = gt.values(y, x);
      if (gv < options.min_depth || gv > options.max_depth) continue;
      if (pred.mask(y, x)) {
        p.push_back(pred.values(y, x));
        g.push_back(gv);
        missing.push_back(false);
      } else if (options.score_missing_pred) {
        p.push_back(options.min_depth);
        g.push_back(gv);
        missing.push_back(true);
      }
    }
  }
  if (g.empty()) throw DataError("depth_metrics: no pixel is valid in both maps within the depth cap");

  MetricReport r;
  if (options.median_scale) {
    std::vector<double> gp;
    std::vector<double> pp;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (missing[i]) continue;
      gp.push_back(g[i]);
      pp.push_back(p[i]);
    }
    if (!pp.empty()) r.scale_factor = median(gp) / median(pp);
  }

  const double t1 = 1.25;
  const double t2 = t1 * t1;
  const double t3 = t2 * t1;
  double se = 0;
  double ar = 0;
  double sr = 0;
  long d1 = 0;
  long d2 = 0;
  long d3 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double pv = missing[i] ? p[i] : p[i] * r.scale_factor;
    pv = std::clamp(pv, options.min_depth, options.max_depth);
    const double gv = g[i];
    const double diff = pv - gv;
    se += diff * diff;
    ar += std::abs(diff) / gv;
    sr += diff * diff / gv;
    const double ratio = std::max(pv / gv, gv / pv);
    d1 += ratio < t1;
    d2 += ratio < t2;
    d3 += ratio < t3;
  }
  const double n = static_cast<double>(g.size());
  r.n_pixels = static_cast<long>(g.size());
  r.rmse = std::sqrt(se / n);
  r.abs_rel = ar / n;
  r.sq_rel = sr / n;
  r.delta1 = static_cast<double>(d1) / n;
  r.delta2 = static_cast<double>(d2) / n;
  r.delta3 = static_cast<double>(d3) / n;
  return r;
}

MetricReport aggregate(const std::vector<MetricReport>& frames) {
  if (frames.empty()) throw DataError("aggregate: no frames");
  MetricReport out;
  out.scale_factor = 0;
  for (const auto& f : frames) {
    out.rmse += f.rmse;
    out.abs_rel += f.abs_rel;
    out.sq_rel += f.sq_rel;
    out.delta1 += f.delta1;
    out.delta2 += f.delta2;
    out.delta3 += f.delta3;
    out.scale_factor += f.scale_factor;
    out.n_pixels += f.n_pixels;
  }
  const double n = static_cast<double>(frames.size());
  out.rmse /= n;
  out.abs_rel /= n;
  out.sq_rel /= n;
  out.delta1 /= n;
  out.delta2 /= n;
  out.delta3 /= n;
  out.scale_factor /= n;
  return out;
}

std::string format_table(const std::vector<TableRow>& rows, int precision) {
  const std::vector<std::string> header = {"Method", "Dataset", "RMSE", "Abs Rel",
                                           "Sq Rel", "δ<1.25", "δ<1.25²", "δ<1.25³"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& row : rows) {
    std::vector<std::string> line = {row.method, row.dataset};
    for (double v : {row.report.rmse, row.report.abs_rel, row.report.sq_rel, row.report.delta1,
                     row.report.delta2, row.report.delta3}) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(precision) << v;
      line.push_back(os.str());
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], display_width(line[c]));

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out << " | ";
      out << pad(line[c], width[c], c >= 2);
    }
    out << '\n';
  };
  emit(cells.front());
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c > 0) out << "-+-";
    out << std::string(width[c], '-');
  }
  out << '\n';
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out.str();
}

}  // namespace udepth
