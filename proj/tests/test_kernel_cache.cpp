#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "gestalt/kernel_cache.hpp"

using namespace gestalt;

namespace {

KernelGrid sample_grid() {
  FPParams p;
  p.sigma_diff = 0.3;
  p.step_ds = 0.5;
  p.n_steps = 25;
  p.n_paths = 400;
  p.seed = 17;
  auto grid = estimate_density(p, GridSpec::for_params(p, 15, 15, 12));
  return normalize_max_one(symmetrize(smooth(grid, 1, 1, 1)));
}

}  // namespace

TEST_CASE("grid cache round trip") {
  const auto grid = sample_grid();
  const auto tmp = std::filesystem::temp_directory_path() / "gestalt_cache_test.fpk";
  save_grid(grid, tmp);
  const auto back = load_grid(tmp);
  std::filesystem::remove(tmp);

  CHECK(back.spec.nx == grid.spec.nx);
  CHECK(back.spec.ny == grid.spec.ny);
  CHECK(back.spec.ntheta == grid.spec.ntheta);
  CHECK(back.spec.x_min == grid.spec.x_min);
  CHECK(back.spec.theta_period == grid.spec.theta_period);
  CHECK(back.normalization == grid.normalization);
  CHECK(back.symmetrized == grid.symmetrized);
  CHECK(back.out_of_range_fraction == grid.out_of_range_fraction);
  CHECK(back.provenance.sigma_diff == grid.provenance.sigma_diff);
  CHECK(back.provenance.n_paths == grid.provenance.n_paths);
  CHECK(back.provenance.seed == grid.provenance.seed);

  REQUIRE(back.values.size() == grid.values.size());
  bool identical = true;
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    identical = identical && back.values[i] == grid.values[i];
  CHECK(identical);
}

TEST_CASE("serialization is byte deterministic") {
  const auto grid = sample_grid();
  CHECK(serialize_grid(grid) == serialize_grid(grid));
}

TEST_CASE("corrupted caches are rejected") {
  const auto grid = sample_grid();
  std::string bytes = serialize_grid(grid);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(parse_grid(bad_magic), IoError);

  CHECK_THROWS_AS(parse_grid(bytes.substr(0, 40)), IoError);
  CHECK_THROWS_AS(parse_grid(bytes.substr(0, bytes.size() - 9)), IoError);
  CHECK_THROWS_AS(parse_grid(""), IoError);
}
