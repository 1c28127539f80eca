#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gestalt/fp_kernel.hpp"
#include "gestalt/io_util.hpp"
#include "gestalt/stimulus.hpp"

namespace gestalt {

enum class DiagonalPolicy { SelfAffinity, Zero };

/// A_ij = gamma*mu * omega(xi_i, xi_j): the stimulus-restricted connectivity
/// matrix. Symmetric and nonnegative by construction; `scale` records the
/// gamma*mu factor baked into the entries.
struct AffinityMatrix {
  Eigen::MatrixXd entries;
  std::vector<CorticalPoint> element_ids;  // row index -> stimulus element
  double scale = 1.0;

  Eigen::Index size() const { return entries.rows(); }

  /// The plain omega matrix with the gamma*mu factor divided out.
  Eigen::MatrixXd omega_matrix() const { return entries / scale; }
};

inline AffinityMatrix build_affinity(
    const StimulusSet& stim, const KernelGrid& grid, double gamma, double mu,
    DiagonalPolicy diagonal = DiagonalPolicy::SelfAffinity) {
  if (!grid.symmetrized)
    throw std::invalid_argument("affinity: kernel grid must be symmetrized");
  if (grid.normalization != GridNormalization::MaxOne)
    throw std::invalid_argument("affinity: kernel grid must be max-one normalized");
  if (!(gamma > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("affinity: gamma and mu must be positive");

  const Eigen::Index n = static_cast<Eigen::Index>(stim.size());
  AffinityMatrix A;
  A.scale = gamma * mu;
  A.element_ids = stim.elements;
  A.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v;
      if (i == j) {
        v = diagonal == DiagonalPolicy::Zero
                ? 0.0
                : eval_omega(grid, stim.elements[i], stim.elements[i],
                             stim.angle_mode);
      } else {
        v = eval_omega(grid, stim.elements[i], stim.elements[j],
                       stim.angle_mode);
      }
      A.entries(i, j) = A.scale * v;
      A.entries(j, i) = A.entries(i, j);
    }
  }
  return A;
}

/// Row-major CSV of the full symmetric matrix.
inline std::string affinity_to_csv(const AffinityMatrix& A) {
  std::string out;
  for (Eigen::Index i = 0; i < A.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.entries.cols(); ++j) {
      if (j) out += ',';
      out += format_double(A.entries(i, j));
    }
    out += '\n';
  }
  return out;
}

/// Sidecar carrying what the CSV cannot: the element list and the scale.
inline nlohmann::ordered_json affinity_sidecar_json(const AffinityMatrix& A) {
  nlohmann::ordered_json j;
  j["scale"] = A.scale;
  auto ids = nlohmann::ordered_json::array();
  for (const auto& e : A.element_ids)
    ids.push_back({{"x", e.x}, {"y", e.y}, {"theta", e.theta}});
  j["element_ids"] = std::move(ids);
  return j;
}

}  // namespace gestalt
