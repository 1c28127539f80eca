#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gestalt/affinity.hpp"
#include "gestalt/io_util.hpp"
#include "gestalt/spectral.hpp"
#include "gestalt/stimulus.hpp"

namespace gestalt {

/// Constant driving the forced linear-regime equation on the input domain.
/// LinearizedTransfer uses 1/2, the value the transfer's middle branch takes
/// at the input level; SlopeTimesInput uses gamma*c, applying the gain to the
/// input level directly. The two disagree whenever gamma*c != 1/2; both are
/// exposed.
enum class ForcingForm { LinearizedTransfer, SlopeTimesInput };

struct MeanFieldParams {
  double alpha = 1.0;        // activity decay
  double gamma_slope = 1.0;  // transfer slope in the linear branch
  double c = 1.0;            // half-height threshold and input level
  double mu = 0.05;          // synaptic facilitation weight on the kernel
  ForcingForm forcing = ForcingForm::LinearizedTransfer;
  double dt = 0.1;
  double t_end = 20.0;
  int stride = 1;  // record every stride-th step

  double forcing_constant() const {
    return forcing == ForcingForm::SlopeTimesInput ? gamma_slope * c : 0.5;
  }
  double branch_low() const { return c - 0.5 / gamma_slope; }
  double branch_high() const { return c + 0.5 / gamma_slope; }

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("mean_field: alpha must be > 0");
    if (!(gamma_slope > 0.0))
      throw std::invalid_argument("mean_field: gamma_slope must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("mean_field: c must be > 0");
    if (mu < 0.0) throw std::invalid_argument("mean_field: mu must be >= 0");
    if (!(dt > 0.0) || !(dt < 2.0 / alpha))
      throw std::invalid_argument("mean_field: need 0 < dt < 2/alpha");
    if (!(t_end > 0.0)) throw std::invalid_argument("mean_field: t_end must be > 0");
    if (stride < 1) throw std::invalid_argument("mean_field: stride must be >= 1");
  }
};

/// Piecewise-linear transfer: 0 below c - 1/(2 gamma), 1 above c + 1/(2 gamma),
/// slope gamma in between; value 1/2 at the threshold c.
inline double transfer(double s, const MeanFieldParams& p) {
  if (s < p.branch_low()) return 0.0;
  if (s > p.branch_high()) return 1.0;
  return p.gamma_slope * (s - p.c) + 0.5;
}

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // one column per recorded time
  double max_abs_activity = 0.0;
  // Range of the transfer argument mu*(W a) + h observed on driven rows, and
  // whether it stayed inside the linear branch the whole run.
  bool regime_certificate = true;
  double regime_min = std::numeric_limits<double>::infinity();
  double regime_max = -std::numeric_limits<double>::infinity();

  Eigen::VectorXd final_state() const { return states.col(states.cols() - 1); }
};

namespace detail {

template <typename Deriv>
Trajectory integrate_rk4(const Eigen::VectorXd& a0, const MeanFieldParams& p,
                         Deriv&& f, const Eigen::VectorXd* regime_h,
                         const Eigen::MatrixXd* W) {
  p.validate();
  const int n_steps = static_cast<int>(std::ceil(p.t_end / p.dt - 1e-12));
  const Eigen::Index n = a0.size();

  Trajectory traj;
  const int n_records = n_steps / p.stride + 1 + (n_steps % p.stride ? 1 : 0);
  traj.states.resize(n, n_records);
  traj.times.reserve(n_records);

  auto observe = [&](const Eigen::VectorXd& a) {
    traj.max_abs_activity =
        std::max(traj.max_abs_activity, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
    if (regime_h != nullptr && W != nullptr && n > 0) {
      const Eigen::VectorXd arg = p.mu * (*W * a) + *regime_h;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((*regime_h)[i] == 0.0) continue;  // undriven rows carry no claim
        traj.regime_min = std::min(traj.regime_min, arg[i]);
        traj.regime_max = std::max(traj.regime_max, arg[i]);
      }
    }
  };
  auto record = [&](double t, const Eigen::VectorXd& a) {
    traj.times.push_back(t);
    traj.states.col(traj.times.size() - 1) = a;
  };

  Eigen::VectorXd a = a0;
  observe(a);
  record(0.0, a);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
  for (int s = 1; s <= n_steps; ++s) {
    k1 = f(a);
    k2 = f(a + 0.5 * p.dt * k1);
    k3 = f(a + 0.5 * p.dt * k2);
    k4 = f(a + p.dt * k3);
    a += (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!a.allFinite())
      throw NumericalError("simulation diverged at t = " +
                           std::to_string(s * p.dt) + " (reduce dt)");
    observe(a);
    if (s % p.stride == 0 || s == n_steps) record(s * p.dt, a);
  }
  traj.states.conservativeResize(n, traj.times.size());
  if (regime_h != nullptr && std::isfinite(traj.regime_min)) {
    traj.regime_certificate = traj.regime_min >= p.branch_low() - 1e-12 &&
                              traj.regime_max <= p.branch_high() + 1e-12;
  }
  return traj;
}

}  // namespace detail

/// Full nonlinear dynamics da/dt = -alpha a + transfer(mu * W a + h).
/// W holds plain omega values (no gamma*mu factor).
inline Trajectory simulate_nonlinear(const Eigen::MatrixXd& W,
                                     const Eigen::VectorXd& h,
                                     const Eigen::VectorXd& a0,
                                     const MeanFieldParams& p) {
  if (W.rows() != W.cols() || W.rows() != a0.size() || h.size() != a0.size())
    throw std::invalid_argument("simulate_nonlinear: size mismatch");
  auto f = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
    Eigen::VectorXd s = p.mu * (W * a) + h;
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = transfer(s[i], p);
    return -p.alpha * a + s;
  };
  return detail::integrate_rk4(a0, p, f, &h, &W);
}

/// Linear-regime dynamics on the input domain:
///   da/dt = -alpha a + gamma mu W a + beta
/// with beta = 0 when homogeneous (perturbation form), else the forcing
/// constant chosen by p.forcing.
inline Trajectory simulate_reduced(const Eigen::MatrixXd& W,
                                   const MeanFieldParams& p,
                                   const Eigen::VectorXd& a0,
                                   bool homogeneous) {
  if (W.rows() != W.cols() || W.rows() != a0.size())
    throw std::invalid_argument("simulate_reduced: size mismatch");
  const double beta = homogeneous ? 0.0 : p.forcing_constant();
  auto f = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
    return (-p.alpha * a + p.gamma_slope * p.mu * (W * a)).array() + beta;
  };
  if (homogeneous) return detail::integrate_rk4(a0, p, f, nullptr, nullptr);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(a0.size(), p.c);
  return detail::integrate_rk4(a0, p, f, &h, &W);
}

inline Trajectory simulate_reduced(const AffinityMatrix& A,
                                   const MeanFieldParams& p,
                                   const Eigen::VectorXd& a0,
                                   bool homogeneous) {
  return simulate_reduced(A.omega_matrix(), p, a0, homogeneous);
}

struct StationarySolution {
  Eigen::VectorXd activity;
  double residual = 0.0;      // |-alpha a + gamma mu W a + beta|_inf
  bool regime_ok = true;      // transfer arguments inside the linear branch
  double regime_min = 0.0;
  double regime_max = 0.0;
};

/// Stationary state of the forced linear-regime equation:
/// (alpha I - gamma mu W) a = beta. Verifies a posteriori that every
/// transfer argument mu (W a)_i + c lies in the linear branch.
inline StationarySolution stationary_state(const Eigen::MatrixXd& W,
                                           const MeanFieldParams& p) {
  const Eigen::Index n = W.rows();
  if (n < 1) throw std::invalid_argument("stationary_state: empty system");
  const double beta = p.forcing_constant();
  const Eigen::MatrixXd M =
      p.alpha * Eigen::MatrixXd::Identity(n, n) - p.gamma_slope * p.mu * W;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw NumericalError(
        "stationary_state: alpha I - gamma mu W is singular at mu = " +
        std::to_string(p.mu) + " (marginal stability)");

  StationarySolution sol;
  sol.activity = lu.solve(Eigen::VectorXd::Constant(n, beta));
  sol.residual = (-p.alpha * sol.activity +
                  p.gamma_slope * p.mu * (W * sol.activity) +
                  Eigen::VectorXd::Constant(n, beta))
                     .cwiseAbs()
                     .maxCoeff();
  const Eigen::VectorXd arg =
      (p.mu * (W * sol.activity)).array() + p.c;
  sol.regime_min = arg.minCoeff();
  sol.regime_max = arg.maxCoeff();
  sol.regime_ok = sol.regime_min >= p.branch_low() - 1e-12 &&
                  sol.regime_max <= p.branch_high() + 1e-12;
  return sol;
}

inline StationarySolution stationary_state(const AffinityMatrix& A,
                                           const MeanFieldParams& p) {
  return stationary_state(A.omega_matrix(), p);
}

struct WeakConnectivityReport {
  double lhs = 0.0;    // mu * sup over rows of the kernel mass
  double bound = 0.0;  // alpha * min(1/(2 gamma), c - 1/(2 gamma))
  double slack = 0.0;  // bound - lhs
  bool pass = false;
  std::string reason;
};

namespace detail {

inline WeakConnectivityReport weak_report(double row_mass,
                                          const MeanFieldParams& p) {
  WeakConnectivityReport r;
  r.lhs = p.mu * row_mass;
  const double half_gain = 0.5 / p.gamma_slope;
  r.bound = p.alpha * std::min(half_gain, p.c - half_gain);
  r.slack = r.bound - r.lhs;
  if (p.c < half_gain) {
    r.pass = false;
    r.reason = "threshold c below 1/(2 gamma): the bound is vacuous";
  } else {
    r.pass = r.lhs <= r.bound;
    if (!r.pass) r.reason = "kernel mass exceeds the weak-connectivity bound";
  }
  return r;
}

}  // namespace detail

/// Discrete check: mu * max_i sum_j W_ij against the branch-preservation
/// bound.
inline WeakConnectivityReport check_weak_connectivity(const Eigen::MatrixXd& W,
                                                      const MeanFieldParams& p) {
  double row_max = 0.0;
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    row_max = std::max(row_max, W.row(i).sum());
  return detail::weak_report(row_max, p);
}

inline WeakConnectivityReport check_weak_connectivity(const AffinityMatrix& A,
                                                      const MeanFieldParams& p) {
  return check_weak_connectivity(A.omega_matrix(), p);
}

/// Continuous check: mu * integral of omega over the whole grid (the
/// translation-invariant row mass).
inline WeakConnectivityReport check_weak_connectivity(const KernelGrid& grid,
                                                      const MeanFieldParams& p) {
  const double cell = grid.spec.wx() * grid.spec.wy() * grid.spec.wtheta();
  return detail::weak_report(grid.total_mass() * cell, p);
}

struct StabilityReport {
  double lambda_tilde_1 = 0.0;
  double mu_star = 0.0;  // +inf when the kernel has no positive eigenvalue
  double mu = 0.0;
  bool stable = true;
  double linear_eigenvalue = 0.0;  // -alpha + mu gamma lambda_tilde_1
};

/// Marginal-stability threshold of the uniform solution: mu* = alpha /
/// (gamma lambda1(W)).
inline StabilityReport stability_threshold(const Eigen::MatrixXd& W,
                                           const MeanFieldParams& p) {
  if (W.rows() < 1) throw std::invalid_argument("stability_threshold: empty");
  double lambda1 = 0.0;
  try {
    lambda1 = top_eigenpair(W).value;
  } catch (const PowerIterationError&) {
    lambda1 = full_spectrum(W).eigenvalues[0];
  }
  StabilityReport r;
  r.lambda_tilde_1 = lambda1;
  r.mu = p.mu;
  r.linear_eigenvalue = -p.alpha + p.mu * p.gamma_slope * lambda1;
  if (lambda1 <= 0.0) {
    r.mu_star = std::numeric_limits<double>::infinity();
    r.stable = true;
  } else {
    r.mu_star = p.alpha / (p.gamma_slope * lambda1);
    r.stable = p.mu < r.mu_star;
  }
  return r;
}

inline StabilityReport stability_threshold(const AffinityMatrix& A,
                                           const MeanFieldParams& p) {
  return stability_threshold(A.omega_matrix(), p);
}

inline nlohmann::ordered_json stability_report_json(
    const StabilityReport& s, const WeakConnectivityReport& w) {
  nlohmann::ordered_json j;
  j["lambda_tilde_1"] = s.lambda_tilde_1;
  if (std::isfinite(s.mu_star))
    j["mu_star"] = s.mu_star;
  else
    j["mu_star"] = nullptr;  // unconditionally stable
  j["mu"] = s.mu;
  j["stable"] = s.stable;
  j["weak_connectivity"] = {{"lhs", w.lhs}, {"bound", w.bound}, {"pass", w.pass}};
  return j;
}

struct OffDomainOptions {
  int off_factor = 4;     // off-domain points per stimulus element
  int theta_ring = 8;     // orientations sampled at each off position
  double padding = 0.1;   // bounding-box padding fraction
  double horizon = 50.0;  // t_end in units of 1/alpha
  std::uint64_t seed = 0;
};

struct OffDomainReport {
  double max_off_activity = 0.0;
  bool pass = false;  // stayed below 1e-9
  WeakConnectivityReport weak;
  int n_on = 0;
  int n_off = 0;
};

/// Embeds the stimulus in a surround of off-domain sample points (positions
/// uniform over the padded bounding box, orientations from a fixed ring),
/// runs the nonlinear dynamics from rest with the two-level input, and
/// reports the largest off-domain activity. The weak-connectivity row mass
/// is taken over all rows, on- and off-domain, summing kernel weights into
/// the driven set.
inline OffDomainReport outside_domain_stays_zero(const KernelGrid& grid,
                                                 const StimulusSet& stim,
                                                 const MeanFieldParams& p,
                                                 const OffDomainOptions& opt = {}) {
  const int n_on = static_cast<int>(stim.size());
  if (n_on == 0) {
    OffDomainReport r;
    r.pass = true;  // nothing drives anything: vacuous
    r.weak = detail::weak_report(0.0, p);
    return r;
  }

  double x_lo = stim.elements[0].x, x_hi = x_lo;
  double y_lo = stim.elements[0].y, y_hi = y_lo;
  for (const auto& e : stim.elements) {
    x_lo = std::min(x_lo, e.x);
    x_hi = std::max(x_hi, e.x);
    y_lo = std::min(y_lo, e.y);
    y_hi = std::max(y_hi, e.y);
  }
  const double pad_x = opt.padding * std::max(x_hi - x_lo, 1.0);
  const double pad_y = opt.padding * std::max(y_hi - y_lo, 1.0);

  std::vector<CorticalPoint> pts = stim.elements;
  const int n_positions =
      (n_on * opt.off_factor + opt.theta_ring - 1) / opt.theta_ring;
  Rng rng(opt.seed, 1);
  const double ring_step = angle_period(stim.angle_mode) / opt.theta_ring;
  for (int i = 0; i < n_positions; ++i) {
    const double x = rng.uniform(x_lo - pad_x, x_hi + pad_x);
    const double y = rng.uniform(y_lo - pad_y, y_hi + pad_y);
    for (int k = 0; k < opt.theta_ring; ++k)
      pts.emplace_back(x, y, k * ring_step);
  }
  const int n_total = static_cast<int>(pts.size());
  const int n_off = n_total - n_on;

  Eigen::MatrixXd W(n_total, n_total);
  for (int i = 0; i < n_total; ++i)
    for (int j = i; j < n_total; ++j) {
      W(i, j) = eval_omega(grid, pts[i], pts[j], stim.angle_mode);
      W(j, i) = W(i, j);
    }

  Eigen::VectorXd h = Eigen::VectorXd::Zero(n_total);
  h.head(n_on).setConstant(stim.input_level_c);

  double row_mass = 0.0;
  for (int i = 0; i < n_total; ++i)
    row_mass = std::max(row_mass, W.row(i).head(n_on).sum());

  MeanFieldParams run = p;
  run.t_end = opt.horizon / p.alpha;
  const Trajectory traj =
      simulate_nonlinear(W, h, Eigen::VectorXd::Zero(n_total), run);

  OffDomainReport r;
  r.n_on = n_on;
  r.n_off = n_off;
  r.weak = detail::weak_report(row_mass, p);
  if (n_off > 0)
    r.max_off_activity =
        traj.states.bottomRows(n_off).cwiseAbs().maxCoeff();
  r.pass = r.max_off_activity < 1e-9;
  return r;
}

/// Least-squares slope of log |direction . a(t)| over the second half of the
/// recorded samples (transients from other modes have died off by then).
inline double exponential_rate(const Trajectory& traj,
                               const Eigen::VectorXd& direction) {
  const std::size_t n = traj.times.size();
  if (n < 4) throw std::invalid_argument("exponential_rate: too few samples");
  const std::size_t start = n / 2;
  double st = 0, sy = 0, stt = 0, sty = 0;
  int m = 0;
  for (std::size_t k = start; k < n; ++k) {
    const double proj = std::fabs(direction.dot(traj.states.col(k)));
    if (proj < 1e-300) continue;
    const double t = traj.times[k], y = std::log(proj);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++m;
  }
  if (m < 2) throw NumericalError("exponential_rate: projection vanished");
  const double denom = m * stt - st * st;
  if (denom == 0.0) throw NumericalError("exponential_rate: degenerate times");
  return (m * sty - st * sy) / denom;
}

/// CSV with header "time,a_0,...,a_{N-1}".
inline std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "time";
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i)
    out += ",a_" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out += format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
      out += ',';
      out += format_double(traj.states(i, static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

}  // namespace gestalt
