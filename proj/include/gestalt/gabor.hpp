#pragma once

#include <cmath>
#include <vector>

#include "gestalt/errors.hpp"
#include "gestalt/image.hpp"
#include "gestalt/se2.hpp"
#include "gestalt/stimulus.hpp"

namespace gestalt {

/// Odd (sine-phase) Gabor bank. The mother profile detects structure oriented
/// along +x; orientation k is the mother evaluated in the frame rotated by
/// k*pi/K. All taps are evaluated analytically on the integer grid, centered
/// in a support x support window (support odd).
struct FilterBank {
  std::vector<double> mother;
  std::vector<std::vector<double>> rotated;  // one tap array per orientation
  int support = 21;
  int orientations = 8;
  double wavelength = 8.0;
  double envelope_sigma = 3.0;

  double bank_angle(int k) const { return kPi * k / orientations; }
  int radius() const { return support / 2; }

  double tap(const std::vector<double>& taps, int u, int v) const {
    return taps[static_cast<std::size_t>(v + radius()) * support +
                (u + radius())];
  }
};

namespace detail {

inline double odd_gabor(double u, double v, double wavelength, double sigma) {
  return std::exp(-0.5 * (u * u + v * v) / (sigma * sigma)) *
         std::sin(kTwoPi * v / wavelength);
}

/// Taps of the mother profile rotated by theta, sampled at integer offsets
/// shifted by a fractional center (fx, fy).
inline std::vector<double> analytic_taps(double theta, double fx, double fy,
                                         int support, double wavelength,
                                         double sigma) {
  const int r = support / 2;
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<double> taps(static_cast<std::size_t>(support) * support);
  for (int v = -r; v <= r; ++v) {
    for (int u = -r; u <= r; ++u) {
      const double du = u - fx, dv = v - fy;
      const double ru = c * du + s * dv;   // R_{-theta} (du, dv)
      const double rv = -s * du + c * dv;
      taps[static_cast<std::size_t>(v + r) * support + (u + r)] =
          odd_gabor(ru, rv, wavelength, sigma);
    }
  }
  return taps;
}

}  // namespace detail

inline FilterBank make_odd_gabor_bank(int orientations = 8,
                                      double wavelength = 8.0,
                                      double envelope_sigma = 3.0,
                                      int support = 21) {
  if (orientations < 4)
    throw std::invalid_argument("gabor: need at least 4 orientations");
  if (support < 3 || support % 2 == 0)
    throw std::invalid_argument("gabor: support must be odd and >= 3");
  if (!(wavelength > 0.0) || !(envelope_sigma > 0.0))
    throw std::invalid_argument("gabor: wavelength and sigma must be positive");

  FilterBank bank;
  bank.support = support;
  bank.orientations = orientations;
  bank.wavelength = wavelength;
  bank.envelope_sigma = envelope_sigma;
  bank.rotated.reserve(orientations);
  for (int k = 0; k < orientations; ++k)
    bank.rotated.push_back(detail::analytic_taps(
        bank.bank_angle(k), 0.0, 0.0, support, wavelength, envelope_sigma));
  bank.mother = bank.rotated[0];
  return bank;
}

/// The receptive profile of the cell at (x, y, theta): the mother profile
/// rotated by theta, centered at the (possibly fractional) position.
inline std::vector<double> gabor_at(const CorticalPoint& xi,
                                    const FilterBank& bank) {
  const double fx = xi.x - std::round(xi.x);
  const double fy = xi.y - std::round(xi.y);
  return detail::analytic_taps(xi.theta, fx, fy, bank.support, bank.wavelength,
                               bank.envelope_sigma);
}

namespace detail {

// Catmull-Rom kernel
inline double cubic_weight(double t) {
  t = std::fabs(t);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

}  // namespace detail

/// Bicubic resampling rotation of an arbitrary tap array (zero outside the
/// window). Round-tripping theta then -theta recovers the input up to
/// resampling error, which scales with (pixel/wavelength)^4.
inline std::vector<double> rotate_taps(const std::vector<double>& taps,
                                       int support, double theta) {
  const int r = support / 2;
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<double> out(static_cast<std::size_t>(support) * support, 0.0);
  auto sample = [&](double u, double v) -> double {
    const double gu = u + r, gv = v + r;
    const int i0 = static_cast<int>(std::floor(gu));
    const int j0 = static_cast<int>(std::floor(gv));
    double acc = 0.0;
    for (int dj = -1; dj <= 2; ++dj) {
      const int j = j0 + dj;
      if (j < 0 || j >= support) continue;
      const double wj = detail::cubic_weight(gv - j);
      for (int di = -1; di <= 2; ++di) {
        const int i = i0 + di;
        if (i < 0 || i >= support) continue;
        acc += taps[static_cast<std::size_t>(j) * support + i] * wj *
               detail::cubic_weight(gu - i);
      }
    }
    return acc;
  };
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u)
      out[static_cast<std::size_t>(v + r) * support + (u + r)] =
          sample(c * u + s * v, -s * u + c * v);
  return out;
}

struct LiftOptions {
  AngleMode angle_mode = AngleMode::HalfCircle;
  int nms_radius = 2;       // suppression window (Chebyshev), 0 disables
  bool multi_orientation = false;
};

/// Lift a grayscale image to position-orientation elements: per pixel, the
/// magnitude-maximal oriented response; pixels that survive non-maximum
/// suppression and exceed response_threshold emit one element (or one per
/// super-threshold orientation when multi_orientation is set). An empty result
/// is legal, not an error.
inline StimulusSet lift_image(const Image& img, const FilterBank& bank,
                              double response_threshold, double c,
                              const LiftOptions& opt = {}) {
  if (!(response_threshold > 0.0))
    throw std::invalid_argument("lift: response_threshold must be > 0");
  if (!(c > 0.0)) throw std::invalid_argument("lift: c must be > 0");

  StimulusSet out;
  out.input_level_c = c;
  out.angle_mode = opt.angle_mode;

  const int r = bank.radius();
  const int K = bank.orientations;
  if (img.width < bank.support || img.height < bank.support) return out;

  const int w = img.width, h = img.height;
  std::vector<double> best(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<int> best_k(static_cast<std::size_t>(w) * h, -1);
  std::vector<double> responses(static_cast<std::size_t>(w) * h * K, 0.0);

  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      double bm = 0.0;
      int bk = -1;
      for (int k = 0; k < K; ++k) {
        double acc = 0.0;
        for (int v = -r; v <= r; ++v)
          for (int u = -r; u <= r; ++u)
            acc += bank.tap(bank.rotated[k], u, v) * img.at(x + u, y + v);
        responses[(static_cast<std::size_t>(y) * w + x) * K + k] = acc;
        if (std::fabs(acc) > bm) {
          bm = std::fabs(acc);
          bk = k;
        }
      }
      best[static_cast<std::size_t>(y) * w + x] = bm;
      best_k[static_cast<std::size_t>(y) * w + x] = bk;
    }
  }

  auto emit_theta = [&](int k, double response) {
    double theta = bank.bank_angle(k);
    if (opt.angle_mode == AngleMode::FullCircle && response < 0.0)
      theta += kPi;
    return theta;
  };

  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const double bm = best[p];
      if (!(bm > response_threshold)) continue;

      // non-maximum suppression; scan-order tie break
      bool keep = true;
      for (int dy = -opt.nms_radius; dy <= opt.nms_radius && keep; ++dy) {
        for (int dx = -opt.nms_radius; dx <= opt.nms_radius && keep; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < r || nx >= w - r || ny < r || ny >= h - r) continue;
          const double nb = best[static_cast<std::size_t>(ny) * w + nx];
          if (nb > bm) keep = false;
          if (nb == bm && (ny < y || (ny == y && nx < x))) keep = false;
        }
      }
      if (!keep) continue;

      if (opt.multi_orientation) {
        for (int k = 0; k < K; ++k) {
          const double resp = responses[p * K + k];
          if (std::fabs(resp) > response_threshold)
            out.elements.emplace_back(x, y, emit_theta(k, resp));
        }
      } else {
        const double resp = responses[p * K + best_k[p]];
        out.elements.emplace_back(x, y, emit_theta(best_k[p], resp));
      }
    }
  }
  return out;
}

}  // namespace gestalt
