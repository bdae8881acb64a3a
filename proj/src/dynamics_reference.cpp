// Serial, time-domain references for the closed-form Abelian averages.
#include <cmath>

#include "quasidyn/dynamics.hpp"
#include "quasidyn/error.hpp"

namespace qd {

namespace {

double default_dt(double T, double dt) { return dt > 0.0 ? dt : T / 1000.0; }

// Samples of g(psi(t)) at t = i dt up to the Abelian cutoff.
template <class F>
std::vector<double> sample_in_time(const Propagator& prop, const Eigen::MatrixXd& rows, double T, double dt, F g) {
  const long steps = static_cast<long>(std::ceil(kAbelianCutoff * T / dt - 1e-9));
  const long M = prop.size();
  const auto& E = prop.energies();
  const auto& c = prop.overlaps();
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::VectorXcd coef(M);
  for (long i = 0; i <= steps; ++i) {
    double t = dt * static_cast<double>(i);
    for (long j = 0; j < M; ++j) coef(j) = std::polar(c(j), -t * E(j));
    Eigen::VectorXcd psi = rows.cast<std::complex<double>>() * coef;
    f.push_back(g(psi));
  }
  return f;
}

}  // namespace

double averaged_window_norm_reference(const Propagator& prop, double L, double T, double dt) {
  dt = default_dt(T, dt);
  const long N = prop.N();
  std::vector<long> sites;
  std::vector<double> weights;
  for (long n = -N; n <= N; ++n) {
    double w = window_weight(n, L);
    if (w > 0.0) {
      sites.push_back(n);
      weights.push_back(w);
    }
  }
  Eigen::MatrixXd rows(static_cast<long>(sites.size()), prop.size());
  for (std::size_t r = 0; r < sites.size(); ++r) rows.row(static_cast<long>(r)) = prop.vectors().row(sites[r] + N);
  auto f = sample_in_time(prop, rows, T, dt, [&](const Eigen::VectorXcd& psi) {
    double s = 0.0;
    for (long r = 0; r < psi.size(); ++r) s += weights[static_cast<std::size_t>(r)] * std::norm(psi(r));
    return s;
  });
  return abelian_average(f, dt, T);
}

double averaged_second_moment_reference(const Propagator& prop, double T, double dt) {
  dt = default_dt(T, dt);
  const long N = prop.N();
  auto f = sample_in_time(prop, prop.vectors(), T, dt, [&](const Eigen::VectorXcd& psi) {
    double s = 0.0;
    for (long n = -N; n <= N; ++n) s += static_cast<double>(n * n) * std::norm(psi(n + N));
    return s;
  });
  return abelian_average(f, dt, T);
}

Eigen::VectorXcd taylor_evolve(const LatticeHamiltonian& h, const Eigen::VectorXcd& psi0, double t, double tol) {
  if (!(t >= 0.0)) throw PreconditionError("evolution time must be >= 0");
  Eigen::VectorXcd sum = psi0;
  Eigen::VectorXcd term = psi0;
  const std::complex<double> step(0.0, -t);
  for (int k = 1; k < 10000; ++k) {
    term = h.apply(term) * (step / static_cast<double>(k));
    sum += term;
    if (term.norm() < tol) return sum;
  }
  throw PreconditionError("Taylor series did not converge; t too large");
}

}  // namespace qd
