#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gestalt/affinity.hpp"
#include "gestalt/errors.hpp"

namespace gestalt {

struct PowerIterationError : NumericalError {
  PowerIterationError(const std::string& msg, double residual_)
      : NumericalError(msg), residual(residual_) {}
  double residual;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

/// Deterministic sign convention: the largest-magnitude entry is positive
/// (first index wins ties).
inline void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::fabs(v[i]) > std::fabs(v[best])) best = i;
  if (v.size() > 0 && v[best] < 0.0) v = -v;
}

}  // namespace detail

/// Leading eigenpair of a symmetric matrix by power iteration from the
/// uniform start vector. Converges when |A v - lambda v| <= tol * lambda;
/// a hard eigenvalue tie (lambda2/lambda1 ~ 1) shows up as non-convergence,
/// reported with the final residual so the caller can fall back to a dense
/// decomposition.
inline EigenPair top_eigenpair(const Eigen::MatrixXd& A, double tol = 1e-10,
                               int max_iter = 10000) {
  const Eigen::Index n = A.rows();
  if (n < 1) throw std::invalid_argument("top_eigenpair: empty matrix");
  if (A.cols() != n) throw std::invalid_argument("top_eigenpair: not square");

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  double lambda = 0.0, residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd w = A * v;
    lambda = v.dot(w);
    residual = (w - lambda * v).norm();
    if (residual <= tol * std::fabs(lambda)) {
      detail::fix_sign(v);
      return {lambda, v, it, residual};
    }
    const double nw = w.norm();
    if (nw == 0.0) {
      // v is annihilated: exact null vector, eigenvalue 0
      detail::fix_sign(v);
      return {0.0, v, it, 0.0};
    }
    v = w / nw;
  }
  throw PowerIterationError(
      "power iteration did not converge (leading eigenvalues nearly tied); "
      "final residual " +
          std::to_string(residual),
      residual);
}

/// First k eigenpairs (descending algebraic order) by repeated power
/// iteration with rank-one deflation. A Gershgorin shift keeps the iteration
/// matrix positive semidefinite so deflation walks the spectrum top-down even
/// after negative eigenvalues become dominant in magnitude.
inline std::vector<EigenPair> top_eigenpairs(const Eigen::MatrixXd& A, int k,
                                             double tol = 1e-10,
                                             int max_iter = 10000) {
  double shift = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    shift = std::max(shift, A.row(i).cwiseAbs().sum());

  std::vector<EigenPair> pairs;
  Eigen::MatrixXd B =
      A + shift * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  const int kk = std::min<int>(k, static_cast<int>(A.rows()));
  for (int t = 0; t < kk; ++t) {
    EigenPair p = top_eigenpair(B, tol, max_iter);
    B -= p.value * p.vector * p.vector.transpose();
    p.value -= shift;  // same eigenvector; residual is shift-invariant
    pairs.push_back(std::move(p));
  }
  return pairs;
}

/// Full symmetric eigendecomposition, eigenvalues descending. Backed by a
/// dense solver; used for spectrum exports and as the oracle for the
/// power-iteration path.
struct SpectralResult {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns, same order
  double reconstruction_error = 0.0;  // relative Frobenius
};

inline SpectralResult full_spectrum(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  if (n < 1) throw std::invalid_argument("full_spectrum: empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success)
    throw NumericalError("full_spectrum: eigensolver failed");

  SpectralResult r;
  r.eigenvalues = solver.eigenvalues().reverse();
  r.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd col = r.eigenvectors.col(i);
    detail::fix_sign(col);
    r.eigenvectors.col(i) = col;
  }
  const double denom = A.norm();
  if (denom > 0.0) {
    const Eigen::MatrixXd recon = r.eigenvectors *
                                  r.eigenvalues.asDiagonal() *
                                  r.eigenvectors.transpose();
    r.reconstruction_error = (A - recon).norm() / denom;
  }
  return r;
}

inline SpectralResult full_spectrum(const AffinityMatrix& A) {
  return full_spectrum(A.entries);
}

/// Best rank-one factor p with A ~ p p^T in the Frobenius sense:
/// p = sqrt(lambda1) * v1.
inline Eigen::VectorXd rank_one_approx(const Eigen::MatrixXd& A, double tol = 1e-10,
                                       int max_iter = 10000) {
  EigenPair top;
  try {
    top = top_eigenpair(A, tol, max_iter);
  } catch (const PowerIterationError&) {
    const SpectralResult s = full_spectrum(A);
    top.value = s.eigenvalues[0];
    top.vector = s.eigenvectors.col(0);
  }
  if (!(top.value > 0.0))
    throw NumericalError("rank_one_approx: leading eigenvalue is not positive");
  return std::sqrt(top.value) * top.vector;
}

inline Eigen::VectorXd rank_one_approx(const AffinityMatrix& A) {
  return rank_one_approx(A.entries);
}

/// A salient group extracted from one round: the indices whose eigenvector
/// weight clears the member threshold, with the eigenpair it came from.
/// submatrix_indices maps eigenvector_restriction entries back to original
/// element indices.
struct PerceptualUnit {
  std::vector<int> member_indices;  // original element ids, ascending
  double eigenvalue = 0.0;
  Eigen::VectorXd eigenvector_restriction;
  std::vector<int> submatrix_indices;
};

struct ExtractOptions {
  double eigen_stop = 0.1;        // relative to the first round's eigenvalue
  double member_threshold = 0.5;  // relative to the eigenvector maximum
  int max_units = 10;
  double tol = 1e-10;
  int max_iter = 10000;
};

/// Iterative grouping: take the dominant eigenvector of the remaining
/// affinity submatrix, threshold it into a unit, delete those rows/columns,
/// repeat. Stops on the relative eigenvalue floor, an empty unit, max_units,
/// or exhaustion. Units are disjoint; leftover elements stay ungrouped.
inline std::vector<PerceptualUnit> extract_units(const Eigen::MatrixXd& A,
                                                 const ExtractOptions& opt = {}) {
  if (!(opt.member_threshold > 0.0) || !(opt.member_threshold < 1.0))
    throw std::invalid_argument("extract_units: member_threshold must be in (0,1)");
  if (opt.eigen_stop < 0.0)
    throw std::invalid_argument("extract_units: eigen_stop must be >= 0");
  if (opt.max_units < 0)
    throw std::invalid_argument("extract_units: max_units must be >= 0");

  std::vector<PerceptualUnit> units;
  std::vector<int> alive(A.rows());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = static_cast<int>(i);

  double first_lambda = 0.0;
  while (!alive.empty() && static_cast<int>(units.size()) < opt.max_units) {
    Eigen::MatrixXd sub(alive.size(), alive.size());
    for (std::size_t r = 0; r < alive.size(); ++r)
      for (std::size_t c = 0; c < alive.size(); ++c)
        sub(r, c) = A(alive[r], alive[c]);

    EigenPair top;
    try {
      top = top_eigenpair(sub, opt.tol, opt.max_iter);
    } catch (const PowerIterationError&) {
      // tied leading eigenvalues: fall back to the dense decomposition
      const SpectralResult s = full_spectrum(sub);
      top.value = s.eigenvalues[0];
      top.vector = s.eigenvectors.col(0);
    }
    if (units.empty()) first_lambda = top.value;
    if (top.value <= opt.eigen_stop * first_lambda) break;

    const double vmax = top.vector.maxCoeff();
    if (!(vmax > 0.0)) break;

    PerceptualUnit unit;
    unit.eigenvalue = top.value;
    unit.eigenvector_restriction = top.vector;
    unit.submatrix_indices = alive;
    std::vector<int> next_alive;
    for (std::size_t r = 0; r < alive.size(); ++r) {
      if (top.vector[static_cast<Eigen::Index>(r)] >=
          opt.member_threshold * vmax)
        unit.member_indices.push_back(alive[r]);
      else
        next_alive.push_back(alive[r]);
    }
    if (unit.member_indices.empty()) break;
    units.push_back(std::move(unit));
    alive.swap(next_alive);
  }
  return units;
}

inline std::vector<PerceptualUnit> extract_units(const AffinityMatrix& A,
                                                 const ExtractOptions& opt = {}) {
  return extract_units(A.entries, opt);
}

inline nlohmann::ordered_json units_to_json(
    const std::vector<PerceptualUnit>& units) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& u : units) {
    nlohmann::ordered_json j;
    j["eigenvalue"] = u.eigenvalue;
    j["member_indices"] = u.member_indices;
    arr.push_back(std::move(j));
  }
  return arr;
}

/// One eigenvalue per line, descending.
inline std::string spectrum_to_csv(const SpectralResult& s) {
  std::string out;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    out += format_double(s.eigenvalues[i]);
    out += '\n';
  }
  return out;
}

}  // namespace gestalt
