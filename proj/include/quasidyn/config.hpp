#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quasidyn/rotations.hpp"

namespace qd {

// "golden", "silver", "a1,a2,...[;t1,...]" (prefix then periodic tail) or a decimal in (0,1).
RotationNumber parse_rotation(const std::string& spec);

struct RunConfig {
  int schema_version = 1;
  std::string alpha = "golden";
  double lambda = 24.0;
  std::vector<double> thetas{0.0};
  int depth = 8;                      // K
  std::vector<int> band_levels{1, 2, 3, 4};
  std::vector<int> band_p{0};
  long N = 0;                         // 0: ballistic rule
  std::vector<double> T_grid{10.0, 20.0, 50.0, 100.0};
  double C1 = 1.0;
  double C2 = 0.5;
  double leakage_threshold = 1e-8;
  int samples_per_band = 9;
  int theta_sweep = 0;                // >0: draw that many theta values from the seed
  std::string out_dir = ".";
  std::uint64_t seed = 20240611;

  RotationNumber rotation() const { return parse_rotation(alpha); }
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Throws PreconditionError on any out-of-range field.
void validate(const RunConfig& c);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

// theta values in [0,1) from the seeded generator; deterministic across platforms.
std::vector<double> sample_thetas(std::uint64_t seed, int count);

}  // namespace qd
