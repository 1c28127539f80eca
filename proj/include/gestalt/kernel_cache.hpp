#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include <json.hpp>

#include "gestalt/fp_kernel.hpp"
#include "gestalt/io_util.hpp"

namespace gestalt {

// Grid cache file layout:
//   bytes 0..3   magic "FPG1"
//   bytes 4..7   uint32 little-endian, JSON header length n
//   bytes 8..8+n JSON metadata (grid shape, ranges, period, normalization,
//                path parameters, format version)
//   then         nx*ny*ntheta float64 little-endian, order (theta, y, x)
inline constexpr char kGridMagic[4] = {'F', 'P', 'G', '1'};
inline constexpr int kGridFormatVersion = 1;

inline nlohmann::ordered_json grid_metadata_json(const KernelGrid& grid) {
  nlohmann::ordered_json j;
  j["format_version"] = kGridFormatVersion;
  j["grid"] = {{"nx", grid.spec.nx},
               {"ny", grid.spec.ny},
               {"ntheta", grid.spec.ntheta},
               {"x_min", grid.spec.x_min},
               {"x_max", grid.spec.x_max},
               {"y_min", grid.spec.y_min},
               {"y_max", grid.spec.y_max},
               {"theta_period", grid.spec.theta_period}};
  j["normalization"] =
      grid.normalization == GridNormalization::MaxOne ? "max_one" : "raw";
  j["symmetrized"] = grid.symmetrized;
  j["out_of_range_fraction"] = grid.out_of_range_fraction;
  j["params"] = {{"sigma_diff", grid.provenance.sigma_diff},
                 {"step_ds", grid.provenance.step_ds},
                 {"n_steps", grid.provenance.n_steps},
                 {"n_paths", grid.provenance.n_paths},
                 {"seed", grid.provenance.seed},
                 {"sqrt_ds_noise", grid.provenance.sqrt_ds_noise}};
  return j;
}

inline std::string serialize_grid(const KernelGrid& grid) {
  const std::string header = grid_metadata_json(grid).dump();
  const std::uint32_t len = static_cast<std::uint32_t>(header.size());
  std::string bytes;
  bytes.reserve(8 + header.size() + grid.values.size() * sizeof(double));
  bytes.append(kGridMagic, 4);
  char lenbuf[4];
  for (int i = 0; i < 4; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xFF);
  bytes.append(lenbuf, 4);
  bytes.append(header);
  bytes.append(reinterpret_cast<const char*>(grid.values.data()),
               grid.values.size() * sizeof(double));
  return bytes;
}

inline void save_grid(const KernelGrid& grid, const std::filesystem::path& path) {
  atomic_write_file(path, serialize_grid(grid));
}

inline KernelGrid parse_grid(const std::string& bytes,
                             const std::string& origin = "<memory>") {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kGridMagic, 4) != 0)
    throw IoError("not a kernel grid cache: " + origin);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 + i]))
           << (8 * i);
  if (bytes.size() < 8 + static_cast<std::size_t>(len))
    throw IoError("truncated grid cache header: " + origin);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad grid cache metadata: " + origin + ": " + e.what());
  }
  if (j.value("format_version", -1) != kGridFormatVersion)
    throw IoError("unsupported grid cache version: " + origin);

  KernelGrid grid;
  const auto& g = j.at("grid");
  grid.spec.nx = g.at("nx").get<int>();
  grid.spec.ny = g.at("ny").get<int>();
  grid.spec.ntheta = g.at("ntheta").get<int>();
  grid.spec.x_min = g.at("x_min").get<double>();
  grid.spec.x_max = g.at("x_max").get<double>();
  grid.spec.y_min = g.at("y_min").get<double>();
  grid.spec.y_max = g.at("y_max").get<double>();
  grid.spec.theta_period = g.at("theta_period").get<double>();
  grid.spec.validate();
  grid.normalization = j.at("normalization").get<std::string>() == "max_one"
                           ? GridNormalization::MaxOne
                           : GridNormalization::Raw;
  grid.symmetrized = j.value("symmetrized", false);
  grid.out_of_range_fraction = j.value("out_of_range_fraction", 0.0);
  const auto& p = j.at("params");
  grid.provenance.sigma_diff = p.at("sigma_diff").get<double>();
  grid.provenance.step_ds = p.at("step_ds").get<double>();
  grid.provenance.n_steps = p.at("n_steps").get<int>();
  grid.provenance.n_paths = p.at("n_paths").get<long>();
  grid.provenance.seed = p.at("seed").get<std::uint64_t>();
  grid.provenance.sqrt_ds_noise = p.value("sqrt_ds_noise", false);

  const std::size_t expect = grid.spec.size() * sizeof(double);
  if (bytes.size() != 8 + static_cast<std::size_t>(len) + expect)
    throw IoError("grid cache payload size mismatch: " + origin);
  grid.values.resize(grid.spec.size());
  std::memcpy(grid.values.data(), bytes.data() + 8 + len, expect);
  return grid;
}

inline KernelGrid load_grid(const std::filesystem::path& path) {
  return parse_grid(read_file_bytes(path), path.string());
}

}  // namespace gestalt
