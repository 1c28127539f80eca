#pragma once

#include <cmath>
#include <numbers>

namespace gestalt {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Angle identification used when comparing orientations. FullCircle treats
/// theta with period 2*pi (directed elements); HalfCircle with period pi
/// (undirected segments, theta ~ theta + pi).
enum class AngleMode { FullCircle, HalfCircle };

inline double angle_period(AngleMode mode) {
  return mode == AngleMode::HalfCircle ? kPi : kTwoPi;
}

/// Wraps an angle into [0, 2*pi).
inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;  // fmod rounding at the seam
  return t;
}

/// A point (x, y, theta) of R^2 x S^1: retinal position plus preferred
/// orientation. theta is stored normalized to [0, 2*pi).
struct CorticalPoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  CorticalPoint() = default;
  CorticalPoint(double x_, double y_, double theta_)
      : x(x_), y(y_), theta(normalize_angle(theta_)) {}
};

inline bool operator==(const CorticalPoint& a, const CorticalPoint& b) {
  return a.x == b.x && a.y == b.y && a.theta == b.theta;
}

/// Group composition g * h: rotate h's position by g.theta, translate by
/// (g.x, g.y), add angles.
inline CorticalPoint compose(const CorticalPoint& g, const CorticalPoint& h) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  return {g.x + c * h.x - s * h.y, g.y + s * h.x + c * h.y, g.theta + h.theta};
}

/// Group inverse: (-R_{-theta}(x, y), -theta).
inline CorticalPoint inverse(const CorticalPoint& g) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  return {-(c * g.x + s * g.y), -(-s * g.x + c * g.y), -g.theta};
}

/// Reflection about the x axis: (x, y, theta) -> (x, -y, -theta). Involutive.
inline CorticalPoint reflect(const CorticalPoint& p) {
  return {p.x, -p.y, -p.theta};
}

/// Displacement of `to` as seen from `from`: inverse(from) * to.
/// Left-invariant: relative_displacement(g*a, g*b) == relative_displacement(a, b).
inline CorticalPoint relative_displacement(const CorticalPoint& from,
                                           const CorticalPoint& to) {
  return compose(inverse(from), to);
}

/// Shortest angular distance under the mode's period; result in [0, period/2].
inline double angle_distance(double theta1, double theta2, AngleMode mode) {
  const double period = angle_period(mode);
  double d = std::fmod(std::fabs(theta1 - theta2), period);
  return std::min(d, period - d);
}

}  // namespace gestalt
