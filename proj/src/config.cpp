#include "quasidyn/config.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "quasidyn/error.hpp"

namespace qd {

namespace {

std::vector<std::int64_t> parse_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw PreconditionError("empty coefficient in '" + s + "'");
    std::size_t used = 0;
    long long v = std::stoll(item, &used);
    if (used != item.size() || v < 1) throw PreconditionError("coefficients must be positive integers: '" + s + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

RotationNumber parse_rotation(const std::string& spec) {
  if (spec == "golden") return RotationNumber::golden();
  if (spec == "silver") return RotationNumber::silver();
  if (spec.find_first_of(".eE") != std::string::npos) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(spec, &used);
    } catch (const std::exception&) {
      throw PreconditionError("cannot parse rotation number '" + spec + "'");
    }
    if (used != spec.size() || !(x > 0.0 && x < 1.0))
      throw PreconditionError("rotation number must lie in (0,1): '" + spec + "'");
    return RotationNumber::from_double(x);
  }
  try {
    auto semi = spec.find(';');
    if (semi == std::string::npos) return RotationNumber(parse_list(spec));
    return RotationNumber(parse_list(spec.substr(0, semi)), parse_list(spec.substr(semi + 1)));
  } catch (const std::invalid_argument&) {
    throw PreconditionError("cannot parse rotation number '" + spec + "'");
  } catch (const std::out_of_range&) {
    throw PreconditionError("coefficient out of range in '" + spec + "'");
  }
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"schema_version", c.schema_version},
                     {"alpha", c.alpha},
                     {"lambda", c.lambda},
                     {"thetas", c.thetas},
                     {"depth", c.depth},
                     {"band_levels", c.band_levels},
                     {"band_p", c.band_p},
                     {"N", c.N},
                     {"T_grid", c.T_grid},
                     {"C1", c.C1},
                     {"C2", c.C2},
                     {"leakage_threshold", c.leakage_threshold},
                     {"samples_per_band", c.samples_per_band},
                     {"theta_sweep", c.theta_sweep},
                     {"out_dir", c.out_dir},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  RunConfig d;
  c.schema_version = j.value("schema_version", d.schema_version);
  if (c.schema_version != 1)
    throw PreconditionError("unsupported config schema_version " + std::to_string(c.schema_version));
  c.alpha = j.value("alpha", d.alpha);
  c.lambda = j.value("lambda", d.lambda);
  c.thetas = j.value("thetas", d.thetas);
  c.depth = j.value("depth", d.depth);
  c.band_levels = j.value("band_levels", d.band_levels);
  c.band_p = j.value("band_p", d.band_p);
  c.N = j.value("N", d.N);
  c.T_grid = j.value("T_grid", d.T_grid);
  c.C1 = j.value("C1", d.C1);
  c.C2 = j.value("C2", d.C2);
  c.leakage_threshold = j.value("leakage_threshold", d.leakage_threshold);
  c.samples_per_band = j.value("samples_per_band", d.samples_per_band);
  c.theta_sweep = j.value("theta_sweep", d.theta_sweep);
  c.out_dir = j.value("out_dir", d.out_dir);
  c.seed = j.value("seed", d.seed);
}

void validate(const RunConfig& c) {
  (void)c.rotation();
  if (!(c.lambda >= 0.0)) throw PreconditionError("lambda must be >= 0");
  for (double t : c.thetas)
    if (!(t >= 0.0 && t < 1.0)) throw PreconditionError("theta must lie in [0,1)");
  if (c.depth < 0) throw PreconditionError("depth must be >= 0");
  for (int k : c.band_levels)
    if (k < 0) throw PreconditionError("band levels must be >= 0");
  for (int p : c.band_p)
    if (p < -1) throw PreconditionError("band p must be >= -1");
  if (c.N < 0) throw PreconditionError("N must be >= 0");
  for (double T : c.T_grid)
    if (!(T > 0.0)) throw PreconditionError("T grid entries must be positive");
  if (!(c.C1 > 0.0)) throw PreconditionError("C1 must be positive");
  if (!(c.leakage_threshold > 0.0)) throw PreconditionError("leakage threshold must be positive");
  if (c.samples_per_band < 1) throw PreconditionError("samples per band must be >= 1");
  if (c.theta_sweep < 0) throw PreconditionError("theta sweep count must be >= 0");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("malformed config " + path + ": " + e.what());
  }
  RunConfig c = j.get<RunConfig>();
  validate(c);
  return c;
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path);
  out << nlohmann::json(c).dump(2) << '\n';
}

std::vector<double> sample_thetas(std::uint64_t seed, int count) {
  // mt19937_64 output is fixed by the standard; the distribution is done by hand
  // because uniform_real_distribution is implementation-defined.
  std::mt19937_64 gen(seed);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(static_cast<double>(gen() >> 11) * 0x1.0p-53);
  return out;
}

}  // namespace qd
