#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gestalt/fp_kernel.hpp"
#include "gestalt/image.hpp"
#include "gestalt/spectral.hpp"
#include "gestalt/stimulus.hpp"

namespace gestalt {

namespace detail {

struct Rgb {
  std::uint8_t r, g, b;
};

inline Rgb unit_color(int unit_index) {
  static const std::array<Rgb, 6> palette = {{{230, 60, 50},
                                              {70, 200, 90},
                                              {80, 120, 240},
                                              {230, 200, 60},
                                              {210, 80, 210},
                                              {70, 210, 210}}};
  return palette[static_cast<std::size_t>(unit_index) % palette.size()];
}

/// Anti-aliased oriented bar centered at (cx, cy), additive max blend.
inline void draw_bar(RgbImage& img, double cx, double cy, double theta,
                     double length, Rgb color) {
  const double hx = 0.5 * length * std::cos(theta);
  const double hy = 0.5 * length * std::sin(theta);
  const double half_w = 0.9;
  const int x_lo = std::max(0, static_cast<int>(std::floor(cx - std::fabs(hx) - 2)));
  const int x_hi = std::min(img.width - 1,
                            static_cast<int>(std::ceil(cx + std::fabs(hx) + 2)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(cy - std::fabs(hy) - 2)));
  const int y_hi = std::min(img.height - 1,
                            static_cast<int>(std::ceil(cy + std::fabs(hy) + 2)));
  const double len2 = hx * hx + hy * hy;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      // distance from pixel center to the segment
      const double px = x - cx, py = y - cy;
      double t = len2 > 0.0 ? std::clamp((px * hx + py * hy) / len2, -1.0, 1.0)
                            : 0.0;
      const double dx = px - t * hx, dy = py - t * hy;
      const double d = std::sqrt(dx * dx + dy * dy);
      const double cov = std::clamp(half_w + 0.7 - d, 0.0, 1.0);
      if (cov <= 0.0) continue;
      std::uint8_t* px8 = img.at(x, y);
      px8[0] = std::max<int>(px8[0], static_cast<int>(color.r * cov));
      px8[1] = std::max<int>(px8[1], static_cast<int>(color.g * cov));
      px8[2] = std::max<int>(px8[2], static_cast<int>(color.b * cov));
    }
  }
}

}  // namespace detail

/// Oriented-segment rendering of a stimulus. Members of extracted units are
/// drawn in the unit's color (first unit red), everything else in gray.
inline RgbImage render_stimulus(const StimulusSet& stim,
                                const std::vector<PerceptualUnit>* units = nullptr,
                                int canvas = 512) {
  RgbImage img(canvas, canvas);
  if (stim.elements.empty()) return img;

  double x_lo = stim.elements[0].x, x_hi = x_lo;
  double y_lo = stim.elements[0].y, y_hi = y_lo;
  for (const auto& e : stim.elements) {
    x_lo = std::min(x_lo, e.x);
    x_hi = std::max(x_hi, e.x);
    y_lo = std::min(y_lo, e.y);
    y_hi = std::max(y_hi, e.y);
  }
  const double span = std::max({x_hi - x_lo, y_hi - y_lo, 1.0});
  const double pad = 0.06 * span;
  const double scale = canvas / (span + 2 * pad);
  auto to_px = [&](double v, double lo) { return (v - lo + pad) * scale; };

  std::vector<int> unit_of(stim.elements.size(), -1);
  if (units != nullptr)
    for (std::size_t u = 0; u < units->size(); ++u)
      for (int idx : (*units)[u].member_indices)
        if (idx >= 0 && idx < static_cast<int>(unit_of.size()))
          unit_of[idx] = static_cast<int>(u);

  const double bar_len = std::max(4.0, scale * span / 34.0);
  for (std::size_t i = 0; i < stim.elements.size(); ++i) {
    const auto& e = stim.elements[i];
    const detail::Rgb color = unit_of[i] >= 0
                                  ? detail::unit_color(unit_of[i])
                                  : detail::Rgb{185, 185, 185};
    detail::draw_bar(img, to_px(e.x, x_lo), to_px(e.y, y_lo), e.theta, bar_len,
                     color);
  }
  return img;
}

/// Heat image of a matrix, scaled to its maximum.
inline Image render_matrix(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return Image(1, 1);
  Image img(static_cast<int>(M.cols()), static_cast<int>(M.rows()));
  const double mx = M.maxCoeff();
  if (mx <= 0.0) return img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      img.at(x, y) = std::max(0.0, M(y, x)) / mx;
  return img;
}

/// (x, y) projection of a kernel grid, scaled to its maximum.
inline Image render_grid_projection(const KernelGrid& grid) {
  const auto proj = project_xy(grid);
  Image img(grid.spec.nx, grid.spec.ny);
  double mx = 0.0;
  for (double v : proj) mx = std::max(mx, v);
  if (mx <= 0.0) return img;
  for (int y = 0; y < grid.spec.ny; ++y)
    for (int x = 0; x < grid.spec.nx; ++x)
      img.at(x, y) = proj[static_cast<std::size_t>(y) * grid.spec.nx + x] / mx;
  return img;
}

}  // namespace gestalt
