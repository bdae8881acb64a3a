#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quasidyn/rotations.hpp"
#include "quasidyn/words.hpp"

namespace qd {

// H u(n) = u(n+1) + u(n-1) + lambda v(n) u(n) on [-N, N], Dirichlet outside.
struct LatticeHamiltonian {
  long N = 0;
  std::vector<double> diag;  // index n + N

  long size() const { return 2 * N + 1; }
  long index(long n) const { return n + N; }
  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;
};

LatticeHamiltonian build_hamiltonian(double lambda, const RotationNumber& r, const Phase& phase, long N);
LatticeHamiltonian hamiltonian_from_diagonal(std::vector<double> diag);  // size must be odd

struct WavePacket {
  long N = 0;
  double t = 0.0;
  Eigen::VectorXcd amplitudes;  // index n + N

  std::complex<double> at(long n) const;
  double norm_sq() const;
};

// ||psi||_L^2 with fractional weight on the two sites just outside [-floor L, floor L].
double window_norm_sq(const WavePacket& psi, double L);

// Weight of site n in ||.||_L^2 (1 inside, L - floor L on the rim, 0 beyond).
double window_weight(long n, double L);

// (2/T) int_0^{15T} e^{-2t/T} f(t) dt for f sampled at t_i = i dt, f linear between samples.
// Throws InsufficientSampling if dt > T/200 or the samples stop short of 15T.
double abelian_average(std::span<const double> f, double dt, double T);

inline constexpr double kAbelianCutoff = 15.0;

// Full eigendecomposition of H, computed once and reused for every t and T.
class Propagator {
 public:
  explicit Propagator(const LatticeHamiltonian& h, long initial_site = 1);
  Propagator(const LatticeHamiltonian& h, const Eigen::VectorXd& initial);

  long N() const { return N_; }
  long size() const { return 2 * N_ + 1; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }  // columns are eigenvectors
  const Eigen::VectorXd& overlaps() const { return overlaps_; }  // <phi_j, psi_0>

  WavePacket evolve(double t) const;
  std::complex<double> amplitude(long n, double t) const;

  // <||psi||_L^2>_T in closed form: sum_{jl} u_j u_l / (1 + T^2 (E_j - E_l)^2 / 4) over the window.
  double averaged_window_norm(double L, double T) const;
  // <sum_n n^2 |psi(n)|^2>_T, same closed form.
  double averaged_second_moment(double T) const;

 private:
  long N_ = 0;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd overlaps_;
  mutable Eigen::MatrixXd moment_gram_;  // (X Phi)^T (X Phi) restricted to weighted columns, lazily built
};

// Time-domain references: trapezoid quadrature of ||psi(t)||_L^2 and of the second moment,
// evaluated serially. dt defaults to T/1000.
double averaged_window_norm_reference(const Propagator& prop, double L, double T, double dt = 0.0);
double averaged_second_moment_reference(const Propagator& prop, double T, double dt = 0.0);

// Closed-form kernel without OpenMP, for comparison against the parallel one.
double averaged_window_norm_serial(const Propagator& prop, double L, double T);

// Truncated Taylor series of e^{-itH} psi_0, summed until the terms fall below tol.
Eigen::VectorXcd taylor_evolve(const LatticeHamiltonian& h, const Eigen::VectorXcd& psi0, double t,
                               double tol = 1e-18);

// p(lambda, alpha) = 6 log B / log((lambda - 8)/3).
double dynamical_exponent(double lambda, double b);

// Smallest N with 2 t_max + 50 <= N for the Abelian cutoff of the largest T.
long ballistic_half_width(double T_max);

struct DynamicsOptions {
  long N = 0;                       // 0: ballistic rule
  double C1 = 1.0;
  double C2 = 0.5;                  // floor used to report the onset T
  double leakage_threshold = 1e-8;  // max |psi(+-N, t)| over probed times
  int leakage_probes = 2000;        // probe times spread over [0, 15 T_max]
  bool golden_flag = false;         // accept 8 < lambda <= 20 for the golden mean
};

struct DynamicsResult {
  double lambda = 0.0;
  std::string rotation;
  std::string phase;
  long N = 0;
  double b_est = 0.0;
  double p = 0.0;
  double C1 = 1.0;
  std::string radius_rule;
  std::vector<double> T_grid;
  std::vector<double> radius;
  std::vector<double> inside_prob;
  std::vector<double> sub_ballistic;  // <||psi||^2_{T^{1/2}}>_T
  double leakage = 0.0;
  double min_inside = 0.0;
  double onset_T = -1.0;  // smallest grid T from which inside_prob >= C2 onwards; -1 if never
};

DynamicsResult verify_dynbound(double lambda, const RotationNumber& r, const Phase& phase,
                               std::span<const double> T_grid, const DynamicsOptions& opts = {});

struct TransportRow {
  double T = 0.0;
  std::vector<double> gamma;
  std::vector<double> inside_prob;  // radius T^gamma
  double second_moment = 0.0;
};

inline const std::vector<double> kTransportGammas{0.25, 0.5, 0.75, 1.0};

std::vector<TransportRow> transport_diagnostics(double lambda, const RotationNumber& r, const Phase& phase,
                                                std::span<const double> T_grid, long N = 0);
std::vector<TransportRow> transport_diagnostics(const Propagator& prop, std::span<const double> T_grid);

// Largest |psi(+-N, t)| over evenly spaced probe times in [0, t_max].
double boundary_leakage(const Propagator& prop, double t_max, int probes);

void to_json(nlohmann::json& j, const DynamicsResult& r);

}  // namespace qd
