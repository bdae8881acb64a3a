#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quasidyn/rotations.hpp"

namespace qd {

enum class BandType { I, II, III, Untyped };

std::string to_string(BandType t);

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  int level = 0;        // order k
  int order_index = 0;  // position among the bands it was listed with
  BandType type = BandType::Untyped;
  std::vector<BandType> type_index;  // i_0 ... i_k once classified
  int trace_k = 0;                   // the band is a band of sigma_(trace_k, trace_p)
  int trace_p = 0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double E) const { return lo <= E && E <= hi; }
};

struct BandSet {
  int k = 0;
  int p = 0;
  bool whole_line = false;  // trace identically 2 (e.g. sigma_(0,0))
  std::vector<Band> bands;
};

enum class BandMethod {
  kEigen,      // periodic / antiperiodic eigenvalues
  kBisection,  // eigenvalue counts from Sylvester inertia, bisected per eigenvalue
};

// lambda * v over one period of the operator whose monodromy is M_{k-1} M_k^p,
// or nullopt when the trace is identically 2.
std::optional<std::vector<double>> period_potential(int k, int p, double lambda, const RotationNumber& r);

// Number of bands of sigma_(k,p): p q_k + q_{k-1} for p >= 0 (q_{-1} = 0) and
// q_k - q_{k-1} for p = -1.
long expected_band_count(int k, int p, const RotationNumber& r);

// Trace of the one-period monodromy, returned as (mantissa, log_scale, derivative mantissa).
struct PeriodicTrace {
  double value;
  double derivative;
};
PeriodicTrace periodic_trace(double E, std::span<const double> potential);

BandSet band_set(int k, int p, double lambda, const RotationNumber& r, BandMethod method = BandMethod::kEigen);

// Band sets for a list of (k, p): OpenMP kernel and serial reference.
std::vector<BandSet> band_set_grid(std::span<const std::pair<int, int>> cells, double lambda, const RotationNumber& r);
std::vector<BandSet> band_set_grid_serial(std::span<const std::pair<int, int>> cells, double lambda,
                                          const RotationNumber& r);

struct BandDiagnostics {
  double endpoint_residual = 0.0;  // max | |t(edge)| - 2 | / max(1, |t'(edge)|)
  bool monotone = true;            // derivative keeps one sign at interior samples
  int slope_sign = 0;
};

BandDiagnostics check_band(const Band& band, double lambda, const RotationNumber& r, int interior_samples = 9);

// ---- spectral generating bands ----

struct GeneratingLevel {
  int order = 0;
  std::vector<Band> bands;  // typed, sorted by energy
  std::vector<int> parent;  // index into the previous level (-1 at order 0)
};

// Levels 0..k of the generating-band hierarchy; containment slack is absolute.
std::vector<GeneratingLevel> generating_hierarchy(int k, double lambda, const RotationNumber& r,
                                                  double slack = 1e-12);

std::vector<Band> generating_bands(int k, double lambda, const RotationNumber& r, double slack = 1e-12);

// T_m: an (m-1, i) band generates t_m(i, j) bands of type (m, j).
Eigen::Matrix3i count_matrix(int m, const RotationNumber& r);

// P_m with t_lambda = 3 / (lambda - 8).
Eigen::Matrix3d bound_matrix(int m, double lambda, const RotationNumber& r);

double t_lambda(double lambda);
double xi(double lambda);  // ((lambda - 8)/3)^{1/2}

// p_1(i_0,i_1) ... p_k(i_{k-1},i_k); throws PreconditionError on a zero factor.
double per_band_product_bound(const Band& band, double lambda, const RotationNumber& r);

// Derivative of the band's own trace function: t_(k,1) for type I, t_(k+1,0) otherwise.
double band_trace_derivative(const Band& band, double E, double lambda, const RotationNumber& r);

// ---- spectrum approximants ----

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

std::vector<Interval> interval_union(std::vector<Interval> a);
std::vector<Interval> interval_intersection(const std::vector<Interval>& a, const std::vector<Interval>& b);
double total_length(const std::vector<Interval>& a);

// intersection over j = 1..k of (sigma_j u sigma_{j+1}), sigma_j = sigma_(j+1,0).
std::vector<Interval> sigma_approx(int k, double lambda, const RotationNumber& r);

struct DerivativeBoundReport {
  double min_ratio = 0.0;
  int worst_level = 0;
  double worst_energy = 0.0;
  long samples = 0;
  long violations = 0;
  std::vector<double> min_ratio_per_level;  // index j-1 for level j
  bool golden_only = false;                 // 8 < lambda <= 20 accepted for the golden mean only
};

// |x_j'(E)| >= A_j xi(lambda)^{j-1} on every band of sigma_j, j = 1..k.
DerivativeBoundReport derivative_bound_check(int k, double lambda, const RotationNumber& r, int samples_per_band);

void to_json(nlohmann::json& j, const Band& b);
void to_json(nlohmann::json& j, const BandSet& s);

}  // namespace qd
