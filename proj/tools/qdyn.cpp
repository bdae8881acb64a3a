// qdyn: command-line driver. Exit codes: 0 ok, 1 runtime failure, 2 usage or
// precondition, 3 boundary leakage (rerun with the suggested N).
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quasidyn/config.hpp"
#include "quasidyn/dynamics.hpp"
#include "quasidyn/error.hpp"
#include "quasidyn/report.hpp"
#include "quasidyn/rotations.hpp"
#include "quasidyn/spectra.hpp"
#include "quasidyn/transfer.hpp"
#include "quasidyn/words.hpp"

namespace {

using qd::RunConfig;

struct Common {
  std::string config_path;
  std::string out_dir;
  std::string alpha;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON run configuration");
  c.out_opt = sub->add_option("--out", c.out_dir, "directory for output files");
  c.alpha_opt = sub->add_option("--alpha", c.alpha, "golden | silver | a1,a2,...[;tail] | decimal");
}

RunConfig base_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : qd::load_config(c.config_path);
  if (c.alpha_opt->count()) cfg.alpha = c.alpha;
  if (c.out_opt->count()) cfg.out_dir = c.out_dir;
  return cfg;
}

bool writing(const Common& c) { return c.out_opt->count() > 0 || !c.config_path.empty(); }

void ensure_dir(const std::string& d) { std::filesystem::create_directories(d); }

qd::Phase phase_for(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw qd::PreconditionError("theta must lie in [0,1)");
  return qd::Phase::generic(theta);
}

// Window starting at site 1 long enough for the length-n factor set.
qd::PotentialWindow factor_window(const qd::RotationNumber& r, const qd::Phase& ph, int n) {
  auto t = qd::deepest_convergents(r);
  int m = 0;
  while (m < t.depth() && t.q[static_cast<std::size_t>(m)] < n) ++m;
  long len = 2 * (n + t.q[static_cast<std::size_t>(m)]) + 2;
  return qd::sample_potential(r, ph, 1, len);
}

// ---- words ----

struct WordsArgs {
  Common common;
  int k = -1;
  int complexity = -1;
  double theta = 0.0;
  bool partition = false;
  long lo = 1, hi = 20;
};

int run_words(WordsArgs& a) {
  RunConfig cfg = base_config(a.common);
  qd::validate(cfg);
  auto r = cfg.rotation();
  auto ph = phase_for(a.theta);
  nlohmann::json out{{"rotation", r.label()}, {"theta", ph.label()}};
  if (a.k >= 0) {
    auto s = qd::standard_word(r, a.k);
    std::cout << "s_" << a.k << " = " << s.str() << '\n';
    out["k"] = a.k;
    out["s_k"] = s.str();
    if (a.k >= 1) {
      auto b = qd::exceptional_word(r, a.k);
      std::cout << "b_" << a.k << " = " << b.str() << '\n';
      out["b_k"] = b.str();
      auto pw = qd::phase_words(r, ph, a.k);
      std::cout << "s_" << a.k << "^theta = " << pw.right.str() << '\n';
      std::cout << "t_" << a.k << "^theta = " << pw.left.str() << '\n';
      out["s_k_theta"] = pw.right.str();
      out["t_k_theta"] = pw.left.str();
    }
  }
  if (a.complexity >= 0) {
    if (a.complexity < 1) throw qd::PreconditionError("--complexity needs n >= 1");
    auto f = qd::factors(factor_window(r, ph, a.complexity), a.complexity);
    std::cout << "factors(" << a.complexity << ") = " << f.size() << '\n';
    out["complexity"] = {{"n", a.complexity}, {"count", f.size()}};
  }
  if (a.partition) {
    if (a.k < 0) throw qd::PreconditionError("--partition needs --k");
    if (a.lo > a.hi) throw qd::PreconditionError("--range needs lo <= hi");
    long pad = qd::partition_padding(r, a.k);
    auto w = qd::sample_potential(r, ph, std::min(a.lo, 1L) - pad, std::max(a.hi, 1L) + pad);
    auto part = qd::k_partition(w, a.k, a.lo, a.hi);
    std::cout << "partition k=" << a.k << " on [" << a.lo << "," << a.hi << "]:";
    for (const auto& b : part.blocks) std::cout << " [" << b.start << "," << b.end << "]s_" << b.level;
    std::cout << '\n';
    out["partition"] = part;
  }
  if (writing(a.common)) {
    ensure_dir(cfg.out_dir);
    qd::save_json(out, qd::join_path(cfg.out_dir, "words.json"));
  }
  return 0;
}

// ---- spectrum ----

struct SpectrumArgs {
  Common common;
  double lambda = 0.0;
  int k = -1;
  int p = 0;
  bool check_lwcor = false;
  bool generating = false;
  bool golden_flag = false;
  std::string method = "eigen";
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* p_opt = nullptr;
};

int run_spectrum(SpectrumArgs& a) {
  RunConfig cfg = base_config(a.common);
  if (a.lambda_opt->count()) cfg.lambda = a.lambda;
  if (a.k_opt->count()) cfg.band_levels = {a.k};
  if (a.p_opt->count()) cfg.band_p = {a.p};
  qd::validate(cfg);
  if (!(cfg.lambda > 0.0)) throw qd::PreconditionError("spectra need lambda > 0");
  auto r = cfg.rotation();
  if (a.check_lwcor && !(cfg.lambda > 20.0) && !(a.golden_flag && cfg.lambda > 8.0 && r == qd::RotationNumber::golden()))
    throw qd::PreconditionError(
        "derivative-bound check requires lambda > 20 (lambda > 8 with --golden-flag for the golden mean); got lambda = " +
        qd::format_double(cfg.lambda));
  auto method = a.method == "bisection" ? qd::BandMethod::kBisection : qd::BandMethod::kEigen;

  qd::CsvTable table({"k", "p", "index", "lo", "hi", "type", "type_index"});
  nlohmann::json sets = nlohmann::json::array();
  for (int k : cfg.band_levels) {
    for (int p : cfg.band_p) {
      auto s = qd::band_set(k, p, cfg.lambda, r, method);
      if (s.whole_line) {
        std::cout << "sigma_(" << k << "," << p << "): whole line\n";
      } else {
        std::cout << "sigma_(" << k << "," << p << "): " << s.bands.size() << " bands\n";
        for (const auto& b : s.bands) {
          std::cout << "  [" << qd::format_double(b.lo) << ", " << qd::format_double(b.hi) << "]\n";
          table.add_row({static_cast<long>(k), static_cast<long>(p), static_cast<long>(b.order_index), b.lo, b.hi,
                         std::string(""), std::string("")});
        }
      }
      sets.push_back(s);
    }
  }
  nlohmann::json out{{"rotation", r.label()}, {"lambda", cfg.lambda}, {"band_sets", sets}};

  const int depth = a.k_opt->count() ? a.k : cfg.depth;
  qd::CsvTable gen_table({"order", "index", "lo", "hi", "type", "type_index"});
  if (a.generating) {
    auto levels = qd::generating_hierarchy(depth, cfg.lambda, r);
    nlohmann::json gen = nlohmann::json::array();
    for (const auto& lvl : levels) {
      std::cout << "generating order " << lvl.order << ": " << lvl.bands.size() << " bands\n";
      for (const auto& b : lvl.bands) {
        std::string idx;
        for (auto t : b.type_index) idx += (idx.empty() ? "" : "-") + qd::to_string(t);
        gen_table.add_row({static_cast<long>(lvl.order), static_cast<long>(b.order_index), b.lo, b.hi,
                           qd::to_string(b.type), idx});
      }
      gen.push_back({{"order", lvl.order}, {"bands", lvl.bands}, {"parent", lvl.parent}});
    }
    out["generating"] = gen;
  }
  if (a.check_lwcor) {
    auto rep = qd::derivative_bound_check(std::max(depth, 1), cfg.lambda, r, cfg.samples_per_band);
    std::cout << "derivative bound: min ratio " << qd::format_double(rep.min_ratio) << " over " << rep.samples
              << " samples, " << rep.violations << " below 1 (worst at level " << rep.worst_level << ", E = "
              << qd::format_double(rep.worst_energy) << ")\n";
    out["lwcor"] = {{"min_ratio", rep.min_ratio},     {"worst_level", rep.worst_level},
                    {"worst_energy", rep.worst_energy}, {"samples", rep.samples},
                    {"violations", rep.violations},   {"min_ratio_per_level", rep.min_ratio_per_level}};
  }
  if (writing(a.common)) {
    ensure_dir(cfg.out_dir);
    table.save(qd::join_path(cfg.out_dir, "bands.csv"));
    if (a.generating) gen_table.save(qd::join_path(cfg.out_dir, "generating_bands.csv"));
    qd::save_json(out, qd::join_path(cfg.out_dir, "spectrum.json"));
  }
  return 0;
}

// ---- dynamics ----

struct DynamicsArgs {
  Common common;
  double lambda = 0.0;
  double theta = 0.0;
  int sweep = 0;
  long N = 0;
  std::vector<double> T;
  double C1 = 1.0, C2 = 0.5, leak = 1e-8;
  std::uint64_t seed = 0;
  bool transport = false;
  bool golden_flag = false;
  CLI::Option *lambda_opt = nullptr, *theta_opt = nullptr, *sweep_opt = nullptr, *N_opt = nullptr,
              *T_opt = nullptr, *C1_opt = nullptr, *C2_opt = nullptr, *leak_opt = nullptr, *seed_opt = nullptr;
};

int run_dynamics(DynamicsArgs& a) {
  RunConfig cfg = base_config(a.common);
  if (a.lambda_opt->count()) cfg.lambda = a.lambda;
  if (a.theta_opt->count()) {
    if (!(a.theta >= 0.0 && a.theta < 1.0)) throw qd::PreconditionError("theta must lie in [0,1)");
    cfg.thetas = {a.theta};
  }
  if (a.sweep_opt->count()) cfg.theta_sweep = a.sweep;
  if (a.N_opt->count()) cfg.N = a.N;
  if (a.T_opt->count()) cfg.T_grid = a.T;
  if (a.C1_opt->count()) cfg.C1 = a.C1;
  if (a.C2_opt->count()) cfg.C2 = a.C2;
  if (a.leak_opt->count()) cfg.leakage_threshold = a.leak;
  if (a.seed_opt->count()) cfg.seed = a.seed;
  qd::validate(cfg);
  auto r = cfg.rotation();

  std::vector<double> thetas = cfg.theta_sweep > 0 ? qd::sample_thetas(cfg.seed, cfg.theta_sweep) : cfg.thetas;
  qd::DynamicsOptions opts;
  opts.N = cfg.N;
  opts.C1 = cfg.C1;
  opts.C2 = cfg.C2;
  opts.leakage_threshold = cfg.leakage_threshold;
  opts.golden_flag = a.golden_flag;

  qd::CsvTable grid({"theta", "T", "radius", "inside_prob", "sub_ballistic", "leakage"});
  qd::CsvTable summary({"theta", "p", "b_est", "N", "min_inside", "min_sub_ballistic", "leakage", "onset_T"});
  qd::CsvTable transport({"theta", "T", "gamma", "inside_prob", "second_moment"});
  nlohmann::json results = nlohmann::json::array();
  for (double theta : thetas) {
    auto ph = phase_for(theta);
    auto res = qd::verify_dynbound(cfg.lambda, r, ph, cfg.T_grid, opts);
    double min_sub = *std::min_element(res.sub_ballistic.begin(), res.sub_ballistic.end());
    for (std::size_t i = 0; i < res.T_grid.size(); ++i)
      grid.add_row({theta, res.T_grid[i], res.radius[i], res.inside_prob[i], res.sub_ballistic[i], res.leakage});
    summary.add_row({theta, res.p, res.b_est, res.N, res.min_inside, min_sub, res.leakage, res.onset_T});
    std::cout << "theta=" << qd::format_double(theta) << " p=" << qd::format_double(res.p)
              << " min_inside=" << qd::format_double(res.min_inside)
              << " min_sub_ballistic=" << qd::format_double(min_sub) << " leakage=" << qd::format_double(res.leakage)
              << " N=" << res.N << '\n';
    nlohmann::json jr = res;
    jr["theta_value"] = theta;
    if (a.transport) {
      auto rows = qd::transport_diagnostics(cfg.lambda, r, ph, cfg.T_grid, res.N);
      nlohmann::json jt = nlohmann::json::array();
      for (const auto& row : rows) {
        for (std::size_t g = 0; g < row.gamma.size(); ++g)
          transport.add_row({theta, row.T, row.gamma[g], row.inside_prob[g], row.second_moment});
        jt.push_back({{"T", row.T}, {"gamma", row.gamma}, {"inside_prob", row.inside_prob},
                      {"second_moment", row.second_moment}});
      }
      jr["transport"] = jt;
    }
    results.push_back(jr);
  }
  std::cout << "rows=" << thetas.size() << '\n';
  if (writing(a.common)) {
    ensure_dir(cfg.out_dir);
    nlohmann::json echoed = cfg;
    echoed.erase("out_dir");  // keep outputs independent of where they are written
    grid.save(qd::join_path(cfg.out_dir, "dynamics.csv"));
    summary.save(qd::join_path(cfg.out_dir, "dynamics_summary.csv"));
    if (a.transport) transport.save(qd::join_path(cfg.out_dir, "transport.csv"));
    qd::save_json({{"config", echoed}, {"seed", cfg.seed}, {"results", results}},
                  qd::join_path(cfg.out_dir, "dynamics.json"));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasiperiodic Sturmian operators: words, spectra and dynamics"};
  app.require_subcommand(1);

  WordsArgs wa;
  auto* words = app.add_subcommand("words", "standard words, factor complexity, k-partitions");
  add_common(words, wa.common);
  words->add_option("--k", wa.k, "level k");
  words->add_option("--complexity", wa.complexity, "count factors of length n");
  words->add_option("--theta", wa.theta, "phase in [0,1)");
  words->add_flag("--partition", wa.partition, "print the k-partition over --range");
  words->add_option("--lo", wa.lo, "first reported site");
  words->add_option("--hi", wa.hi, "last reported site");

  SpectrumArgs sa;
  auto* spectrum = app.add_subcommand("spectrum", "periodic-approximant bands and generating bands");
  add_common(spectrum, sa.common);
  sa.lambda_opt = spectrum->add_option("--lambda", sa.lambda, "coupling");
  sa.k_opt = spectrum->add_option("--k", sa.k, "level k");
  sa.p_opt = spectrum->add_option("--p", sa.p, "power p >= -1");
  spectrum->add_flag("--check-lwcor", sa.check_lwcor, "check the trace-derivative lower bound");
  spectrum->add_flag("--generating", sa.generating, "classify generating bands up to order k");
  spectrum->add_flag("--golden-flag", sa.golden_flag, "allow 8 < lambda <= 20 for the golden mean");
  spectrum->add_option("--method", sa.method, "eigen | bisection")->check(CLI::IsMember({"eigen", "bisection"}));

  DynamicsArgs da;
  auto* dynamics = app.add_subcommand("dynamics", "wavepacket spreading and the averaged inside probability");
  add_common(dynamics, da.common);
  da.lambda_opt = dynamics->add_option("--lambda", da.lambda, "coupling");
  da.theta_opt = dynamics->add_option("--theta", da.theta, "phase in [0,1)");
  da.sweep_opt = dynamics->add_option("--theta-sweep", da.sweep, "number of seeded random phases");
  da.N_opt = dynamics->add_option("--N", da.N, "lattice half-width (default: ballistic rule)");
  da.T_opt = dynamics->add_option("--T", da.T, "averaging times")->expected(1, -1);
  da.C1_opt = dynamics->add_option("--C1", da.C1, "radius constant");
  da.C2_opt = dynamics->add_option("--C2", da.C2, "floor used to report the onset T");
  da.leak_opt = dynamics->add_option("--leakage", da.leak, "boundary amplitude threshold");
  da.seed_opt = dynamics->add_option("--seed", da.seed, "seed for phase sampling");
  dynamics->add_flag("--transport", da.transport, "also report inside probabilities at T^gamma");
  dynamics->add_flag("--golden-flag", da.golden_flag, "allow 8 < lambda <= 20 for the golden mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*words) return run_words(wa);
    if (*spectrum) return run_spectrum(sa);
    if (*dynamics) return run_dynamics(da);
  } catch (const qd::LeakageExceeded& e) {
    std::cerr << "error: " << e.what() << "\nsuggested N: " << e.suggested_half_width() << '\n';
    return 3;
  } catch (const qd::PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
