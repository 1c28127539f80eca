#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "gestalt/errors.hpp"
#include "gestalt/rng.hpp"
#include "gestalt/se2.hpp"

namespace gestalt {

/// Parameters of the stochastic path model
///   x' = ds*cos(theta), y' = ds*sin(theta), theta' = ds*N(0, sigma^2)
/// integrated for n_steps from the group identity.
struct FPParams {
  double sigma_diff = 0.08;  // per-unit-step angular noise std dev
  double step_ds = 1.0;      // arc-length step
  int n_steps = 100;         // steps per path (H)
  long n_paths = 3000;
  std::uint64_t seed = 0;
  // When set, the angular increment uses sqrt(ds)*sigma*N instead of the
  // literal ds*sigma*N (diffusion scaling of the step).
  bool sqrt_ds_noise = false;

  void validate() const {
    if (!(sigma_diff > 0.0)) throw std::invalid_argument("fp: sigma_diff must be > 0");
    if (!(step_ds > 0.0)) throw std::invalid_argument("fp: step_ds must be > 0");
    if (n_steps < 1) throw std::invalid_argument("fp: n_steps must be >= 1");
    if (n_paths < 1) throw std::invalid_argument("fp: n_paths must be >= 1");
  }
};

struct GridSpec {
  int nx = 101, ny = 101, ntheta = 64;
  double x_min = -100.0, x_max = 100.0;
  double y_min = -100.0, y_max = 100.0;
  double theta_period = kTwoPi;  // 2*pi (directed) or pi (undirected)

  /// Default grid for given path parameters: odd spatial bin counts so the
  /// identity sits at a bin center, ranges [-L, L] with L = H*ds.
  static GridSpec for_params(const FPParams& p, int nx = 101, int ny = 101,
                             int ntheta = 64) {
    const double L = p.n_steps * p.step_ds;
    return GridSpec{nx, ny, ntheta, -L, L, -L, L, kTwoPi};
  }

  double wx() const { return (x_max - x_min) / nx; }
  double wy() const { return (y_max - y_min) / ny; }
  double wtheta() const { return theta_period / ntheta; }
  std::size_t size() const {
    return static_cast<std::size_t>(nx) * ny * ntheta;
  }
  /// Storage order is theta-major: index = (t*ny + y)*nx + x.
  std::size_t index(int ix, int iy, int it) const {
    return (static_cast<std::size_t>(it) * ny + iy) * nx + ix;
  }

  bool symmetric_ranges() const {
    const double sx = std::fabs(x_min + x_max);
    const double sy = std::fabs(y_min + y_max);
    const double span = std::max(x_max - x_min, y_max - y_min);
    return sx <= 1e-9 * span && sy <= 1e-9 * span;
  }

  void validate() const {
    if (nx < 2 || ny < 2 || ntheta < 2)
      throw std::invalid_argument("grid: all bin counts must be >= 2");
    if (!(x_max > x_min) || !(y_max > y_min))
      throw std::invalid_argument("grid: empty spatial range");
    if (!(theta_period > 0.0))
      throw std::invalid_argument("grid: theta period must be positive");
  }
};

enum class GridNormalization { Raw, MaxOne };

/// A scalar field sampled over (x, y, theta) bins. Holds either the raw
/// path-occupation density or its symmetrized, normalized form; metadata says
/// which. theta axis is cyclic with period spec.theta_period.
struct KernelGrid {
  GridSpec spec;
  std::vector<double> values;  // size spec.size(), order (theta, y, x)
  GridNormalization normalization = GridNormalization::Raw;
  bool symmetrized = false;
  double out_of_range_fraction = 0.0;  // visits that missed the grid
  FPParams provenance;

  double max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
  }
  double total_mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }

  /// Trilinear interpolation at a displacement point, cyclic in theta.
  /// Points outside the spatial range evaluate to 0 (far pairs have
  /// negligible connectivity at this resolution).
  double value_at(double x, double y, double theta) const {
    const double fx = (x - (spec.x_min + 0.5 * spec.wx())) / spec.wx();
    const double fy = (y - (spec.y_min + 0.5 * spec.wy())) / spec.wy();
    double t = std::fmod(theta, spec.theta_period);
    if (t < 0.0) t += spec.theta_period;
    const double ft = t / spec.wtheta();

    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    int k0 = static_cast<int>(std::floor(ft));
    const double ax = fx - i0, ay = fy - j0;
    double at = ft - k0;
    if (k0 >= spec.ntheta) { k0 -= spec.ntheta; }
    const int k1 = (k0 + 1) % spec.ntheta;

    double acc = 0.0;
    for (int di = 0; di <= 1; ++di) {
      const int i = i0 + di;
      if (i < 0 || i >= spec.nx) continue;
      const double wxk = di ? ax : 1.0 - ax;
      for (int dj = 0; dj <= 1; ++dj) {
        const int j = j0 + dj;
        if (j < 0 || j >= spec.ny) continue;
        const double wyk = dj ? ay : 1.0 - ay;
        for (int dk = 0; dk <= 1; ++dk) {
          const int k = dk ? k1 : k0;
          const double wtk = dk ? at : 1.0 - at;
          acc += values[spec.index(i, j, k)] * wxk * wyk * wtk;
        }
      }
    }
    return acc;
  }

  double value_at(const CorticalPoint& p) const {
    return value_at(p.x, p.y, p.theta);
  }
};

using Path = std::vector<CorticalPoint>;

/// Forward-Euler realization of the stochastic direction field. Each path
/// starts at the identity; path k draws from stream (seed, k) so results do
/// not depend on scheduling.
inline Path sample_one_path(const FPParams& p, long path_index) {
  Rng rng(p.seed, static_cast<std::uint64_t>(path_index));
  const double noise_scale =
      p.sqrt_ds_noise ? std::sqrt(p.step_ds) * p.sigma_diff
                      : p.step_ds * p.sigma_diff;
  Path path;
  path.reserve(p.n_steps + 1);
  double x = 0.0, y = 0.0, theta = 0.0;
  path.emplace_back(x, y, theta);
  for (int s = 0; s < p.n_steps; ++s) {
    x += p.step_ds * std::cos(theta);
    y += p.step_ds * std::sin(theta);
    theta = normalize_angle(theta + noise_scale * rng.gaussian());
    path.emplace_back(x, y, theta);
  }
  return path;
}

inline std::vector<Path> sample_paths(const FPParams& p) {
  p.validate();
  std::vector<Path> paths;
  paths.reserve(p.n_paths);
  for (long k = 0; k < p.n_paths; ++k) paths.push_back(sample_one_path(p, k));
  return paths;
}

namespace detail {

/// Visit counts are integers so that merging per-worker histograms is
/// associative and the result is identical for any worker count.
struct VisitCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t out_of_range = 0;

  explicit VisitCounts(std::size_t n) : counts(n, 0) {}

  void add(const GridSpec& g, const CorticalPoint& pt) {
    const int ix = static_cast<int>(std::floor((pt.x - g.x_min) / g.wx()));
    const int iy = static_cast<int>(std::floor((pt.y - g.y_min) / g.wy()));
    if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny) {
      ++out_of_range;
      return;
    }
    double t = std::fmod(pt.theta, g.theta_period);
    if (t < 0.0) t += g.theta_period;
    int it = static_cast<int>(std::floor(t / g.wtheta() + 0.5)) % g.ntheta;
    ++counts[g.index(ix, iy, it)];
  }

  void merge(const VisitCounts& o) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    out_of_range += o.out_of_range;
  }
};

inline KernelGrid counts_to_grid(const GridSpec& spec, const VisitCounts& vc,
                                 const FPParams& p) {
  KernelGrid grid;
  grid.spec = spec;
  grid.provenance = p;
  grid.values.resize(spec.size());
  const double inv = 1.0 / static_cast<double>(p.n_paths);
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    grid.values[i] = static_cast<double>(vc.counts[i]) * inv;
  const double total =
      static_cast<double>(p.n_paths) * (p.n_steps + 1);
  grid.out_of_range_fraction = static_cast<double>(vc.out_of_range) / total;
  return grid;
}

}  // namespace detail

/// Histogram of per-step visits of explicit paths, divided by the number of
/// paths (time-integrated occupation per path).
inline KernelGrid accumulate_paths(const std::vector<Path>& paths,
                                   const GridSpec& spec,
                                   const FPParams& provenance) {
  spec.validate();
  if (paths.empty()) throw std::invalid_argument("accumulate: no paths");
  detail::VisitCounts vc(spec.size());
  for (const Path& path : paths)
    for (const CorticalPoint& pt : path) vc.add(spec, pt);
  FPParams p = provenance;
  p.n_paths = static_cast<long>(paths.size());
  return detail::counts_to_grid(spec, vc, p);
}

/// Fused sample + accumulate; equivalent to accumulate_paths(sample_paths(p))
/// bit for bit, without holding every path in memory. n_workers > 1 splits the
/// path range; integer histograms keep the merge order-independent.
inline KernelGrid estimate_density(const FPParams& p, const GridSpec& spec,
                                   int n_workers = 1) {
  p.validate();
  spec.validate();
  n_workers = std::max(1, n_workers);

  std::vector<detail::VisitCounts> partial(
      n_workers, detail::VisitCounts(spec.size()));
  auto run_block = [&](int w, long lo, long hi) {
    const double noise_scale =
        p.sqrt_ds_noise ? std::sqrt(p.step_ds) * p.sigma_diff
                        : p.step_ds * p.sigma_diff;
    for (long k = lo; k < hi; ++k) {
      Rng rng(p.seed, static_cast<std::uint64_t>(k));
      double x = 0.0, y = 0.0, theta = 0.0;
      partial[w].add(spec, CorticalPoint(x, y, theta));
      for (int s = 0; s < p.n_steps; ++s) {
        x += p.step_ds * std::cos(theta);
        y += p.step_ds * std::sin(theta);
        theta = normalize_angle(theta + noise_scale * rng.gaussian());
        partial[w].add(spec, CorticalPoint(x, y, theta));
      }
    }
  };

  if (n_workers == 1) {
    run_block(0, 0, p.n_paths);
  } else {
    const long block = (p.n_paths + n_workers - 1) / n_workers;
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) {
      const long lo = w * block;
      const long hi = std::min<long>(p.n_paths, lo + block);
      if (lo >= hi) break;
      threads.emplace_back(run_block, w, lo, hi);
    }
    for (auto& t : threads) t.join();
    for (int w = 1; w < n_workers; ++w) partial[0].merge(partial[w]);
  }
  return detail::counts_to_grid(spec, partial[0], p);
}

/// Separable local weighted mean: Gaussian taps truncated at 3 bandwidths,
/// cyclic wrap on theta. Bandwidths are in bins; 0 disables an axis. Mass is
/// redistributed source-by-source, so the total is preserved even at the
/// spatial edges.
inline KernelGrid smooth(const KernelGrid& grid, double bw_x, double bw_y,
                         double bw_theta) {
  if (bw_x < 0.0 || bw_y < 0.0 || bw_theta < 0.0)
    throw std::invalid_argument("smooth: bandwidths must be >= 0");

  KernelGrid out = grid;
  const GridSpec& g = grid.spec;

  auto taps_for = [](double bw) {
    const int r = static_cast<int>(std::ceil(3.0 * bw));
    std::vector<double> w(2 * r + 1);
    for (int d = -r; d <= r; ++d)
      w[d + r] = std::exp(-0.5 * (d * d) / (bw * bw));
    return w;
  };

  // x and y: clamp at the boundary by renormalizing each source's taps.
  auto pass_spatial = [&](int axis, double bw) {
    if (bw == 0.0) return;
    const auto w = taps_for(bw);
    const int r = (static_cast<int>(w.size()) - 1) / 2;
    const int n = axis == 0 ? g.nx : g.ny;
    std::vector<double> in(n), res(n);
    for (int it = 0; it < g.ntheta; ++it) {
      const int other_n = axis == 0 ? g.ny : g.nx;
      for (int o = 0; o < other_n; ++o) {
        for (int i = 0; i < n; ++i)
          in[i] = axis == 0 ? out.values[g.index(i, o, it)]
                            : out.values[g.index(o, i, it)];
        std::fill(res.begin(), res.end(), 0.0);
        for (int i = 0; i < n; ++i) {
          if (in[i] == 0.0) continue;
          double norm = 0.0;
          const int lo = std::max(0, i - r), hi = std::min(n - 1, i + r);
          for (int j = lo; j <= hi; ++j) norm += w[j - i + r];
          const double v = in[i] / norm;
          for (int j = lo; j <= hi; ++j) res[j] += v * w[j - i + r];
        }
        for (int i = 0; i < n; ++i) {
          if (axis == 0)
            out.values[g.index(i, o, it)] = res[i];
          else
            out.values[g.index(o, i, it)] = res[i];
        }
      }
    }
  };

  pass_spatial(0, bw_x);
  pass_spatial(1, bw_y);

  if (bw_theta > 0.0) {
    auto w = taps_for(bw_theta);
    const int r = (static_cast<int>(w.size()) - 1) / 2;
    double wsum = 0.0;
    for (double v : w) wsum += v;
    for (double& v : w) v /= wsum;
    std::vector<double> in(g.ntheta), res(g.ntheta);
    for (int iy = 0; iy < g.ny; ++iy) {
      for (int ix = 0; ix < g.nx; ++ix) {
        for (int k = 0; k < g.ntheta; ++k) in[k] = out.values[g.index(ix, iy, k)];
        std::fill(res.begin(), res.end(), 0.0);
        for (int k = 0; k < g.ntheta; ++k) {
          if (in[k] == 0.0) continue;
          for (int d = -r; d <= r; ++d) {
            const int j = ((k + d) % g.ntheta + g.ntheta) % g.ntheta;
            res[j] += in[k] * w[d + r];
          }
        }
        for (int k = 0; k < g.ntheta; ++k) out.values[g.index(ix, iy, k)] = res[k];
      }
    }
  }
  return out;
}

/// omega0(eta) = (Gamma0(eta) + Gamma0(eta^{-1})) / 2, sampled back onto the
/// same grid. eta^{-1} values are read by interpolation, so the grid must
/// cover it: symmetric spatial ranges are required.
inline KernelGrid symmetrize(const KernelGrid& grid) {
  const GridSpec& g = grid.spec;
  if (!g.symmetric_ranges())
    throw std::invalid_argument(
        "symmetrize: grid spatial ranges must be symmetric about 0");

  KernelGrid out = grid;
  for (int it = 0; it < g.ntheta; ++it) {
    const double theta = it * g.wtheta();
    for (int iy = 0; iy < g.ny; ++iy) {
      const double y = g.y_min + (iy + 0.5) * g.wy();
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x_min + (ix + 0.5) * g.wx();
        const CorticalPoint inv = inverse(CorticalPoint(x, y, theta));
        out.values[g.index(ix, iy, it)] =
            0.5 * (grid.values[g.index(ix, iy, it)] + grid.value_at(inv));
      }
    }
  }
  out.symmetrized = true;
  return out;
}

/// Rescale so the maximum value is 1 (the form the affinity matrix and the
/// distance estimate expect).
inline KernelGrid normalize_max_one(const KernelGrid& grid) {
  const double m = grid.max_value();
  if (!(m > 0.0))
    throw NumericalError("normalize: grid has no positive mass");
  KernelGrid out = grid;
  for (double& v : out.values) v /= m;
  out.normalization = GridNormalization::MaxOne;
  return out;
}

namespace detail {

/// Reads the kernel at the displacement of each point relative to the other
/// and averages. On a symmetrized grid the two reads agree to interpolation
/// tolerance; summing both (computed from the original points) makes the
/// value bit-identical under argument swap.
inline double paired_read(const KernelGrid& grid, const CorticalPoint& a,
                          const CorticalPoint& b) {
  return 0.5 * (grid.value_at(relative_displacement(b, a)) +
                grid.value_at(relative_displacement(a, b)));
}

}  // namespace detail

/// Connectivity strength between two cortical points, by left-invariant
/// lookup of the symmetrized kernel. In HalfCircle mode each element stands
/// for an undirected segment: the value is the maximum over the two
/// directional representatives of each argument.
inline double eval_omega(const KernelGrid& grid, const CorticalPoint& a,
                         const CorticalPoint& b,
                         AngleMode mode = AngleMode::FullCircle) {
  if (mode == AngleMode::FullCircle) {
    return detail::paired_read(grid, a, b);
  }
  double best = 0.0;
  for (int fa = 0; fa < 2; ++fa) {
    for (int fb = 0; fb < 2; ++fb) {
      const CorticalPoint pa(a.x, a.y, a.theta + fa * kPi);
      const CorticalPoint pb(b.x, b.y, b.theta + fb * kPi);
      best = std::max(best, detail::paired_read(grid, pa, pb));
    }
  }
  return best;
}

/// Inverts omega ~ exp(-d^2): d = sqrt(-log(omega/omega_max)).
inline double distance_estimate(double omega_value, double omega_max) {
  if (!(omega_value > 0.0))
    throw NumericalError(
        "distance_estimate: omega <= 0, pair disconnected at this resolution");
  if (!(omega_max > 0.0) || omega_value > omega_max * (1.0 + 1e-12))
    throw std::invalid_argument("distance_estimate: need 0 < omega <= omega_max");
  const double ratio = std::min(omega_value / omega_max, 1.0);
  return std::sqrt(std::max(0.0, -std::log(ratio)));
}

/// Sum over theta: the (x, y) projection used for renders and morphology
/// statistics. Row-major, index iy*nx + ix.
inline std::vector<double> project_xy(const KernelGrid& grid) {
  const GridSpec& g = grid.spec;
  std::vector<double> proj(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  for (int it = 0; it < g.ntheta; ++it)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        proj[static_cast<std::size_t>(iy) * g.nx + ix] +=
            grid.values[g.index(ix, iy, it)];
  return proj;
}

/// Center of mass of the (x, y) projection, in grid units.
inline std::pair<double, double> center_of_mass_xy(const KernelGrid& grid) {
  const GridSpec& g = grid.spec;
  const auto proj = project_xy(grid);
  double m = 0.0, sx = 0.0, sy = 0.0;
  for (int iy = 0; iy < g.ny; ++iy) {
    const double y = g.y_min + (iy + 0.5) * g.wy();
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = g.x_min + (ix + 0.5) * g.wx();
      const double v = proj[static_cast<std::size_t>(iy) * g.nx + ix];
      m += v;
      sx += v * x;
      sy += v * y;
    }
  }
  if (m <= 0.0) return {0.0, 0.0};
  return {sx / m, sy / m};
}

/// Projected mass near (+-r, 0) divided by mass near (0, +-r), where
/// r = radius_fraction * (x_max - x_min). Probes are disks of two bin widths.
/// Returns +inf when the y-axis probes are empty.
inline double axis_mass_ratio(const KernelGrid& grid,
                              double radius_fraction = 0.2) {
  const GridSpec& g = grid.spec;
  const auto proj = project_xy(grid);
  const double r = radius_fraction * (g.x_max - g.x_min);
  const double probe = 2.0 * std::max(g.wx(), g.wy());

  auto disk_mass = [&](double cx, double cy) {
    double m = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
      const double y = g.y_min + (iy + 0.5) * g.wy();
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x_min + (ix + 0.5) * g.wx();
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= probe * probe)
          m += proj[static_cast<std::size_t>(iy) * g.nx + ix];
      }
    }
    return m;
  };

  const double mx = disk_mass(r, 0.0) + disk_mass(-r, 0.0);
  const double my = disk_mass(0.0, r) + disk_mass(0.0, -r);
  if (my <= 0.0) return std::numeric_limits<double>::infinity();
  return mx / my;
}

}  // namespace gestalt
