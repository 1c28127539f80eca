#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "gestalt/affinity.hpp"

using namespace gestalt;

namespace {

const KernelGrid& shared_omega() {
  static const KernelGrid grid = [] {
    FPParams p;
    p.sigma_diff = 0.25;
    p.step_ds = 0.5;
    p.n_steps = 40;
    p.n_paths = 20000;
    p.seed = 9;
    const GridSpec spec = GridSpec::for_params(p, 41, 41, 32);
    return normalize_max_one(
        symmetrize(smooth(estimate_density(p, spec, 4), 1, 1, 1)));
  }();
  return grid;
}

StimulusSet tiny_stimulus() {
  StimulusSet s;
  s.angle_mode = AngleMode::FullCircle;
  s.input_level_c = 1.0;
  s.elements = {{0, 0, 0}, {3, 0, 0}, {10, 4, 1.2}, {-5, 2, 2.9}, {1, -6, 4.0}};
  return s;
}

}  // namespace

TEST_CASE("affinity requires a symmetrized, normalized kernel") {
  FPParams p;
  p.sigma_diff = 0.3;
  p.step_ds = 0.5;
  p.n_steps = 20;
  p.n_paths = 200;
  const auto raw = estimate_density(p, GridSpec::for_params(p, 15, 15, 8));
  const auto stim = tiny_stimulus();
  CHECK_THROWS_AS(build_affinity(stim, raw, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_affinity(stim, symmetrize(raw), 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_affinity(stim, shared_omega(), 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("empty stimulus gives an empty matrix") {
  StimulusSet empty;
  const auto A = build_affinity(empty, shared_omega(), 1.0, 1.0);
  CHECK(A.size() == 0);
  CHECK(A.element_ids.empty());
}

TEST_CASE("unit scale reproduces the kernel verbatim") {
  const auto stim = tiny_stimulus();
  const auto A = build_affinity(stim, shared_omega(), 1.0, 1.0);
  REQUIRE(A.size() == 5);
  CHECK(A.scale == 1.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      if (i != j)
        CHECK(A.entries(i, j) == eval_omega(shared_omega(), stim.elements[i],
                                            stim.elements[j], stim.angle_mode));
      CHECK(A.entries(i, j) == A.entries(j, i));
      CHECK(A.entries(i, j) >= 0.0);
    }
}

TEST_CASE("gamma and mu scale the entries") {
  const auto stim = tiny_stimulus();
  const auto base = build_affinity(stim, shared_omega(), 1.0, 1.0);
  const auto scaled = build_affinity(stim, shared_omega(), 2.0, 3.0);
  CHECK(scaled.scale == 6.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(scaled.entries(i, j) == Catch::Approx(6.0 * base.entries(i, j)));
  // omega_matrix undoes the scale
  CHECK(scaled.omega_matrix()(0, 1) == Catch::Approx(base.entries(0, 1)));
}

TEST_CASE("nearby collinear pairs bind tighter than distant parallel ones") {
  StimulusSet s;
  s.angle_mode = AngleMode::FullCircle;
  s.elements = {{0, 0, 0}, {3, 0, 0},    // collinear, 3 apart
                {0, 0, 0}, {0, 12, 0}};  // parallel, 12 apart, side by side
  const auto A = build_affinity(s, shared_omega(), 1.0, 1.0);
  CHECK(A.entries(0, 1) > A.entries(2, 3));
}

TEST_CASE("permuting the stimulus permutes the matrix") {
  const auto stim = tiny_stimulus();
  const auto A = build_affinity(stim, shared_omega(), 1.0, 1.0);

  const std::vector<int> perm = {3, 0, 4, 1, 2};
  StimulusSet shuffled = stim;
  for (std::size_t i = 0; i < perm.size(); ++i)
    shuffled.elements[i] = stim.elements[perm[i]];
  const auto B = build_affinity(shuffled, shared_omega(), 1.0, 1.0);

  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = 0; j < perm.size(); ++j)
      CHECK(B.entries(i, j) == A.entries(perm[i], perm[j]));
}

TEST_CASE("diagonal policy") {
  const auto stim = tiny_stimulus();
  const auto self = build_affinity(stim, shared_omega(), 1.0, 1.0,
                                   DiagonalPolicy::SelfAffinity);
  const auto zero =
      build_affinity(stim, shared_omega(), 1.0, 1.0, DiagonalPolicy::Zero);
  for (int i = 0; i < 5; ++i) {
    CHECK(self.entries(i, i) ==
          eval_omega(shared_omega(), stim.elements[i], stim.elements[i],
                     stim.angle_mode));
    CHECK(zero.entries(i, i) == 0.0);
  }
  // off-diagonal agrees
  CHECK(zero.entries(0, 1) == self.entries(0, 1));
}

TEST_CASE("affinity CSV and sidecar") {
  const auto stim = tiny_stimulus();
  const auto A = build_affinity(stim, shared_omega(), 1.0, 2.0);
  const std::string csv = affinity_to_csv(A);
  // N lines, N fields each
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 5);

  const auto sidecar = affinity_sidecar_json(A);
  CHECK(sidecar.at("scale").get<double>() == 2.0);
  CHECK(sidecar.at("element_ids").size() == 5);
  CHECK(sidecar.at("element_ids")[2].at("theta").get<double>() ==
        stim.elements[2].theta);
}
