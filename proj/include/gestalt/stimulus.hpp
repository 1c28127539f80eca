#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gestalt/errors.hpp"
#include "gestalt/io_util.hpp"
#include "gestalt/rng.hpp"
#include "gestalt/se2.hpp"

namespace gestalt {

/// The discrete input domain: a finite set of position-orientation elements,
/// each carrying the input level c. Optional integer labels hold ground-truth
/// group ids (0 = background) for synthetic scenes.
struct StimulusSet {
  std::vector<CorticalPoint> elements;
  double input_level_c = 1.0;
  AngleMode angle_mode = AngleMode::HalfCircle;
  std::vector<int> labels;  // empty, or one per element

  std::size_t size() const { return elements.size(); }
  bool has_labels() const { return labels.size() == elements.size(); }
};

/// A sampled curve along which coherent contour elements are placed.
struct ContourSpec {
  enum class Kind { None, Circle, Arc, Line };
  Kind kind = Kind::None;
  int n_samples = 0;
  double cx = 0.0, cy = 0.0, radius = 0.0;     // Circle / Arc
  double angle_start = 0.0, angle_end = 0.0;   // Arc, radians on the circle
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;  // Line endpoints

  static ContourSpec circle(double cx, double cy, double radius, int n) {
    ContourSpec s;
    s.kind = Kind::Circle;
    s.cx = cx;
    s.cy = cy;
    s.radius = radius;
    s.n_samples = n;
    return s;
  }
  static ContourSpec arc(double cx, double cy, double radius, double a0,
                         double a1, int n) {
    ContourSpec s;
    s.kind = Kind::Arc;
    s.cx = cx;
    s.cy = cy;
    s.radius = radius;
    s.angle_start = a0;
    s.angle_end = a1;
    s.n_samples = n;
    return s;
  }
  static ContourSpec line(double x0, double y0, double x1, double y1, int n) {
    ContourSpec s;
    s.kind = Kind::Line;
    s.x0 = x0;
    s.y0 = y0;
    s.x1 = x1;
    s.y1 = y1;
    s.n_samples = n;
    return s;
  }

  /// Sample position + exact analytic tangent orientation, k in [0, n).
  CorticalPoint sample(int k) const {
    switch (kind) {
      case Kind::Circle: {
        const double t = kTwoPi * k / n_samples;
        return {cx + radius * std::cos(t), cy + radius * std::sin(t),
                t + kPi / 2};
      }
      case Kind::Arc: {
        const double t =
            n_samples == 1
                ? 0.5 * (angle_start + angle_end)
                : angle_start + (angle_end - angle_start) * k / (n_samples - 1);
        return {cx + radius * std::cos(t), cy + radius * std::sin(t),
                t + kPi / 2};
      }
      case Kind::Line: {
        const double t = n_samples == 1
                             ? 0.5
                             : static_cast<double>(k) / (n_samples - 1);
        return {x0 + (x1 - x0) * t, y0 + (y1 - y0) * t,
                std::atan2(y1 - y0, x1 - x0)};
      }
      case Kind::None:
        break;
    }
    throw std::invalid_argument("contour: cannot sample an empty spec");
  }
};

struct FieldOptions {
  double fov = 128.0;           // square field of view [0, fov]^2
  double min_separation = 4.0;  // centre-to-centre exclusion radius
  double input_level_c = 1.0;
  AngleMode angle_mode = AngleMode::HalfCircle;
  int max_place_tries = 20000;
};

/// Field-style display: coherent contour samples (labels 1, 2, ...) plus
/// uniform-random background elements (label 0), with a minimum separation so
/// no two elements coincide at grid resolution. Deterministic given the seed.
inline StimulusSet generate_fhh_scene(int n_total,
                                      const std::vector<ContourSpec>& contours,
                                      double jitter, std::uint64_t seed,
                                      const FieldOptions& opt = {}) {
  if (n_total < 1) throw std::invalid_argument("stimulus: n_total must be >= 1");
  if (jitter < 0.0) throw std::invalid_argument("stimulus: jitter must be >= 0");
  int n_contour = 0;
  for (const auto& c : contours) {
    if (c.kind == ContourSpec::Kind::None) continue;
    if (c.n_samples < 1)
      throw std::invalid_argument("stimulus: contour needs n_samples >= 1");
    n_contour += c.n_samples;
  }
  if (n_contour > n_total)
    throw std::invalid_argument(
        "stimulus: contour sample count exceeds n_total");

  StimulusSet out;
  out.input_level_c = opt.input_level_c;
  out.angle_mode = opt.angle_mode;
  out.elements.reserve(n_total);
  out.labels.reserve(n_total);

  Rng rng(seed, 0);
  int label = 0;
  for (const auto& c : contours) {
    if (c.kind == ContourSpec::Kind::None) continue;
    ++label;
    for (int k = 0; k < c.n_samples; ++k) {
      CorticalPoint p = c.sample(k);
      if (jitter > 0.0)
        p = CorticalPoint(p.x, p.y, p.theta + jitter * rng.gaussian());
      out.elements.push_back(p);
      out.labels.push_back(label);
    }
  }

  const double period = angle_period(opt.angle_mode);
  int tries = 0;
  while (static_cast<int>(out.elements.size()) < n_total) {
    const double x = rng.uniform(0.0, opt.fov);
    const double y = rng.uniform(0.0, opt.fov);
    bool clear = true;
    for (const auto& e : out.elements) {
      const double dx = e.x - x, dy = e.y - y;
      if (dx * dx + dy * dy < opt.min_separation * opt.min_separation) {
        clear = false;
        break;
      }
    }
    if (!clear) {
      if (++tries > opt.max_place_tries)
        throw std::invalid_argument(
            "stimulus: field too dense for the requested min separation");
      continue;
    }
    out.elements.emplace_back(x, y, rng.uniform(0.0, period));
    out.labels.push_back(0);
  }
  return out;
}

inline StimulusSet generate_fhh_stimulus(int n_total, const ContourSpec& contour,
                                         double jitter, std::uint64_t seed,
                                         const FieldOptions& opt = {}) {
  return generate_fhh_scene(n_total, std::vector<ContourSpec>{contour}, jitter,
                            seed, opt);
}

// ---- stimulus JSON ----
// {"angle_mode": "full"|"half", "c": number,
//  "elements": [{"x":..., "y":..., "theta":..., "label":...}, ...]}
// "label" appears when ground truth is known.

inline nlohmann::ordered_json stimulus_to_json(const StimulusSet& s) {
  nlohmann::ordered_json j;
  j["angle_mode"] = s.angle_mode == AngleMode::HalfCircle ? "half" : "full";
  j["c"] = s.input_level_c;
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    nlohmann::ordered_json e;
    e["x"] = s.elements[i].x;
    e["y"] = s.elements[i].y;
    e["theta"] = s.elements[i].theta;
    if (s.has_labels()) e["label"] = s.labels[i];
    arr.push_back(std::move(e));
  }
  j["elements"] = std::move(arr);
  return j;
}

inline StimulusSet stimulus_from_json(const nlohmann::json& j) {
  StimulusSet s;
  try {
    const std::string mode = j.at("angle_mode").get<std::string>();
    if (mode == "half")
      s.angle_mode = AngleMode::HalfCircle;
    else if (mode == "full")
      s.angle_mode = AngleMode::FullCircle;
    else
      throw IoError("stimulus: angle_mode must be \"full\" or \"half\"");
    s.input_level_c = j.at("c").get<double>();
    if (!(s.input_level_c > 0.0))
      throw IoError("stimulus: c must be positive");
    bool any_label = false;
    for (const auto& e : j.at("elements")) {
      s.elements.emplace_back(e.at("x").get<double>(), e.at("y").get<double>(),
                              e.at("theta").get<double>());
      if (e.contains("label")) {
        any_label = true;
        s.labels.push_back(e.at("label").get<int>());
      } else {
        s.labels.push_back(0);
      }
    }
    if (!any_label) s.labels.clear();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("stimulus: malformed JSON: ") + e.what());
  }
  return s;
}

inline void save_stimulus(const StimulusSet& s, const std::filesystem::path& p) {
  atomic_write_file(p, stimulus_to_json(s).dump(2) + "\n");
}

inline StimulusSet load_stimulus(const std::filesystem::path& p) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(p));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("stimulus: cannot parse " + p.string() + ": " + e.what());
  }
  return stimulus_from_json(j);
}

}  // namespace gestalt
