#include "udepth/sampler.hpp"

#include <stdexcept>

namespace udepth {
namespace {

std::optional<BilinearCell> valid_cell(const ImageBuffer& src, const FlowField& flow,
                                       const Mask* source_mask, int y, int x) {
  if (!flow.valid(y, x)) return std::nullopt;
  auto cell = locate_cell(flow.u(y, x), flow.v(y, x), src.width(), src.height());
  if (!cell) return std::nullopt;
  if (source_mask) {
    const Mask& m = *source_mask;
    if (!(m(cell->y0, cell->x0) && m(cell->y0, cell->x1) && m(cell->y1, cell->x0) &&
          m(cell->y1, cell->x1)))
      return std::nullopt;
  }
  return cell;
}

void check_mask(const ImageBuffer& src, const Mask* source_mask) {
  if (source_mask && (source_mask->rows() != src.height() || source_mask->cols() != src.width()))
    throw std::invalid_argument("bilinear_sample: source mask size mismatch");
}

}  // namespace

SampleResult bilinear_sample(const ImageBuffer& src, const FlowField& flow,
                             const Mask* source_mask) {
  check_mask(src, source_mask);
  const int w = flow.width();
  const int h = flow.height();
  SampleResult out{ImageBuffer(w, h, src.channels()), Mask::Constant(h, w, false)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto cell = valid_cell(src, flow, source_mask, y, x);
      if (!cell) continue;
      out.mask(y, x) = true;
      for (int c = 0; c < src.channels(); ++c) out.image(y, x, c) = interpolate(src.plane(c), *cell);
    }
  }
  return out;
}

SampleJacobian bilinear_sample_jacobian(const ImageBuffer& src, const FlowField& flow,
                                        const Mask* source_mask) {
  check_mask(src, source_mask);
  const int w = flow.width();
  const int h = flow.height();
  SampleJacobian jac;
  jac.d_u.assign(static_cast<std::size_t>(src.channels()), Plane<double>::Zero(h, w));
  jac.d_v.assign(static_cast<std::size_t>(src.channels()), Plane<double>::Zero(h, w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto cell = valid_cell(src, flow, source_mask, y, x);
      if (!cell) continue;
      for (int c = 0; c < src.channels(); ++c) {
        const Eigen::Vector2d g = interpolate_gradient(src.plane(c), *cell);
        jac.d_u[c](y, x) = g.x();
        jac.d_v[c](y, x) = g.y();
      }
    }
  }
  return jac;
}

}  // namespace udepth
