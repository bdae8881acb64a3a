#include "quasidyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <cblas.h>
#include <lapacke.h>

#include "quasidyn/error.hpp"

namespace qd {

Eigen::MatrixXd LatticeHamiltonian::dense() const {
  const long M = size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(M, M);
  for (long i = 0; i < M; ++i) {
    h(i, i) = diag[static_cast<std::size_t>(i)];
    if (i + 1 < M) h(i, i + 1) = h(i + 1, i) = 1.0;
  }
  return h;
}

namespace {

template <class Vec>
Vec apply_tridiagonal(const std::vector<double>& diag, const Vec& u) {
  const long M = static_cast<long>(diag.size());
  Vec out(M);
  for (long i = 0; i < M; ++i) {
    auto s = diag[static_cast<std::size_t>(i)] * u(i);
    if (i > 0) s += u(i - 1);
    if (i + 1 < M) s += u(i + 1);
    out(i) = s;
  }
  return out;
}

}  // namespace

Eigen::VectorXd LatticeHamiltonian::apply(const Eigen::VectorXd& u) const { return apply_tridiagonal(diag, u); }
Eigen::VectorXcd LatticeHamiltonian::apply(const Eigen::VectorXcd& u) const { return apply_tridiagonal(diag, u); }

LatticeHamiltonian build_hamiltonian(double lambda, const RotationNumber& r, const Phase& phase, long N) {
  if (N < 1) throw PreconditionError("lattice half-width must be >= 1");
  PotentialWindow w = sample_potential(r, phase, -N, N);
  LatticeHamiltonian h;
  h.N = N;
  h.diag.resize(static_cast<std::size_t>(2 * N + 1));
  for (long n = -N; n <= N; ++n) h.diag[static_cast<std::size_t>(n + N)] = lambda * w.at(n);
  return h;
}

LatticeHamiltonian hamiltonian_from_diagonal(std::vector<double> diag) {
  if (diag.size() % 2 == 0 || diag.size() < 3) throw PreconditionError("diagonal must have odd length >= 3");
  LatticeHamiltonian h;
  h.N = static_cast<long>(diag.size() / 2);
  h.diag = std::move(diag);
  return h;
}

std::complex<double> WavePacket::at(long n) const {
  if (n < -N || n > N) return 0.0;
  return amplitudes(n + N);
}

double WavePacket::norm_sq() const { return amplitudes.squaredNorm(); }

double window_weight(long n, double L) {
  double fl = std::floor(L);
  double an = static_cast<double>(std::labs(n));
  if (an <= fl) return 1.0;
  if (an == fl + 1.0) return L - fl;
  return 0.0;
}

double window_norm_sq(const WavePacket& psi, double L) {
  if (!(L >= 0.0)) throw PreconditionError("window length must be >= 0");
  const long reach = static_cast<long>(std::min(std::floor(L) + 1.0, static_cast<double>(psi.N)));
  double s = 0.0;
  for (long n = -reach; n <= reach; ++n) s += window_weight(n, L) * std::norm(psi.at(n));
  return s;
}

double abelian_average(std::span<const double> f, double dt, double T) {
  if (!(T > 0.0)) throw PreconditionError("averaging time must be positive");
  if (!(dt > 0.0) || dt > T / 200.0 * (1.0 + 1e-12))
    throw InsufficientSampling("sample spacing must be <= T/200");
  const double t_max = kAbelianCutoff * T;
  if (f.size() < 2 || dt * static_cast<double>(f.size() - 1) < t_max * (1.0 - 1e-12))
    throw InsufficientSampling("samples stop before the cutoff 15T");
  // Weight integrated exactly against the piecewise-linear interpolant of f.
  const double a = 2.0 / T;
  const double ah = a * dt;
  const double e = std::exp(-ah);
  const double em1 = -std::expm1(-ah);  // int_0^{ah} e^{-x} dx
  // Per interval, with x = a (t - t_i): int e^{-x} [(1 - x/ah) f_i + (x/ah) f_{i+1}] dx.
  const double wr = em1 / ah - e;
  const double wl = em1 - wr;
  const long steps = std::min<long>(static_cast<long>(f.size()) - 1, std::lround(std::ceil(t_max / dt - 1e-9)));
  double sum = 0.0;
  double decay = 1.0;
  for (long i = 0; i < steps; ++i) {
    double h_frac = 1.0;
    double lo = f[static_cast<std::size_t>(i)], hi = f[static_cast<std::size_t>(i + 1)];
    double t0 = dt * static_cast<double>(i);
    if (t0 + dt > t_max) h_frac = (t_max - t0) / dt;
    if (h_frac < 1.0) {
      // last partial interval: integrate the interpolant over [t0, t_max]
      double hh = a * dt * h_frac;
      double ee = std::exp(-hh);
      double m0 = -std::expm1(-hh);                       // int_0^{hh} e^{-x} dx
      double m1 = (m0 - hh * ee) / (a * dt);              // int_0^{hh} (x/(a dt)) e^{-x} dx
      sum += decay * ((m0 - m1) * lo + m1 * hi);
    } else {
      sum += decay * (wl * lo + wr * hi);
    }
    decay *= e;
  }
  return sum;
}

long ballistic_half_width(double T_max) {
  return static_cast<long>(std::ceil(2.0 * kAbelianCutoff * T_max)) + 50;
}

double dynamical_exponent(double lambda, double b) {
  double base = (lambda - 8.0) / 3.0;
  if (!(base > 1.0)) throw PreconditionError("the exponent needs (lambda - 8)/3 > 1");
  if (!(b > 1.0)) throw PreconditionError("growth constant must exceed 1");
  return 6.0 * std::log(b) / std::log(base);
}

// ---- propagator ----

namespace {

struct EigenPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

EigenPair tridiagonal_eigen(const LatticeHamiltonian& h) {
  const lapack_int M = static_cast<lapack_int>(h.size());
  EigenPair out;
  out.values = Eigen::Map<const Eigen::VectorXd>(h.diag.data(), M);
  Eigen::VectorXd off = Eigen::VectorXd::Ones(std::max<lapack_int>(M - 1, 1));
  out.vectors.resize(M, M);
  lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', M, out.values.data(), off.data(), out.vectors.data(), M);
  if (info != 0) throw EigenSolveError("tridiagonal eigensolve failed (info " + std::to_string(info) + ")");
  return out;
}

}  // namespace

Propagator::Propagator(const LatticeHamiltonian& h, long initial_site) : N_(h.N) {
  if (initial_site < -h.N || initial_site > h.N) throw PreconditionError("initial site outside the lattice");
  auto eig = tridiagonal_eigen(h);
  energies_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);
  overlaps_ = vectors_.row(h.index(initial_site)).transpose();
}

Propagator::Propagator(const LatticeHamiltonian& h, const Eigen::VectorXd& initial) : N_(h.N) {
  if (initial.size() != h.size()) throw PreconditionError("initial vector has the wrong length");
  auto eig = tridiagonal_eigen(h);
  energies_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);
  overlaps_ = vectors_.transpose() * initial;
}

WavePacket Propagator::evolve(double t) const {
  if (!(t >= 0.0)) throw PreconditionError("evolution time must be >= 0");
  const long M = size();
  Eigen::VectorXcd coef(M);
  for (long j = 0; j < M; ++j) coef(j) = std::polar(overlaps_(j), -t * energies_(j));
  WavePacket w;
  w.N = N_;
  w.t = t;
  w.amplitudes = vectors_.cast<std::complex<double>>() * coef;
  return w;
}

std::complex<double> Propagator::amplitude(long n, double t) const {
  if (n < -N_ || n > N_) return 0.0;
  const long row = n + N_;
  std::complex<double> s = 0.0;
  for (long j = 0; j < size(); ++j) s += vectors_(row, j) * std::polar(overlaps_(j), -t * energies_(j));
  return s;
}

namespace detail {

// Columns whose overlap can be dropped: the discarded pairs contribute at most
// 2 (sum of dropped |c_j|) (sum of all |c_j|) <= budget to any weighted sum.
std::vector<long> active_columns(const Eigen::VectorXd& c, double budget) {
  const long M = c.size();
  std::vector<long> order(static_cast<std::size_t>(M));
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    double x = std::fabs(c(a)), y = std::fabs(c(b));
    return x != y ? x < y : a < b;
  });
  double total = c.cwiseAbs().sum();
  double dropped = 0.0;
  std::size_t first = 0;
  while (first < order.size() && 2.0 * (dropped + std::fabs(c(order[first]))) * total <= budget) {
    dropped += std::fabs(c(order[first]));
    ++first;
  }
  std::vector<long> keep(order.begin() + static_cast<long>(first), order.end());
  std::sort(keep.begin(), keep.end());
  return keep;
}

struct WindowRows {
  std::vector<long> rows;  // lattice row indices
  std::vector<double> weights;
  bool complement = false;
};

WindowRows window_rows(long N, double L) {
  const long M = 2 * N + 1;
  WindowRows in, out;
  out.complement = true;
  for (long n = -N; n <= N; ++n) {
    double w = window_weight(n, L);
    if (w > 0.0) {
      in.rows.push_back(n + N);
      in.weights.push_back(w);
    }
    if (w < 1.0) {
      out.rows.push_back(n + N);
      out.weights.push_back(1.0 - w);
    }
  }
  (void)M;
  return in.rows.size() <= out.rows.size() ? in : out;
}

// Scaled rows A(r, j) = sqrt(w_r) phi_j(row_r) c_j over the active columns.
Eigen::MatrixXd weighted_block(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& c,
                               const std::vector<long>& cols, const WindowRows& win) {
  const long R = static_cast<long>(win.rows.size());
  const long J = static_cast<long>(cols.size());
  Eigen::MatrixXd a(R, J);
  for (long jj = 0; jj < J; ++jj) {
    long j = cols[static_cast<std::size_t>(jj)];
    for (long r = 0; r < R; ++r)
      a(r, jj) = std::sqrt(win.weights[static_cast<std::size_t>(r)]) * vectors(win.rows[static_cast<std::size_t>(r)], j) * c(j);
  }
  return a;
}

// Upper triangle of A^T A.
Eigen::MatrixXd gram_upper(const Eigen::MatrixXd& a) {
  const long J = a.cols();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(J, J);
  if (a.rows() == 0 || J == 0) return s;
  cblas_dsyrk(CblasColMajor, CblasUpper, CblasTrans, static_cast<int>(J), static_cast<int>(a.rows()), 1.0, a.data(),
              static_cast<int>(a.rows()), 0.0, s.data(), static_cast<int>(J));
  return s;
}

// sum_{j,l} S_jl / (1 + T^2 (E_j - E_l)^2 / 4) from the upper triangle of S.
double kernel_sum(const Eigen::MatrixXd& s_upper, const Eigen::VectorXd& E, const std::vector<long>& cols, double T,
                  bool parallel) {
  const long J = static_cast<long>(cols.size());
  std::vector<double> row(static_cast<std::size_t>(J), 0.0);
  const double q = T * T / 4.0;
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (long j = 0; j < J; ++j) {
    const double ej = E(cols[static_cast<std::size_t>(j)]);
    double acc = s_upper(j, j);
    for (long l = j + 1; l < J; ++l) {
      double d = ej - E(cols[static_cast<std::size_t>(l)]);
      acc += 2.0 * s_upper(j, l) / (1.0 + q * d * d);
    }
    row[static_cast<std::size_t>(j)] = acc;
  }
  double sum = 0.0;
  for (double v : row) sum += v;  // fixed order, independent of the thread count
  return sum;
}

constexpr double kPruneBudget = 1e-13;

double averaged_window_norm_impl(const Propagator& prop, double L, double T, bool parallel) {
  if (!(T > 0.0)) throw PreconditionError("averaging time must be positive");
  if (!(L >= 0.0)) throw PreconditionError("window length must be >= 0");
  const auto& c = prop.overlaps();
  auto cols = active_columns(c, kPruneBudget);
  auto win = window_rows(prop.N(), std::min(L, static_cast<double>(prop.N()) + 2.0));
  double part = 0.0;
  if (!win.rows.empty()) {
    auto s = gram_upper(weighted_block(prop.vectors(), c, cols, win));
    part = kernel_sum(s, prop.energies(), cols, T, parallel);
  }
  double v = win.complement ? c.squaredNorm() - part : part;
  return std::clamp(v, 0.0, c.squaredNorm());
}

}  // namespace detail

double Propagator::averaged_window_norm(double L, double T) const {
  return detail::averaged_window_norm_impl(*this, L, T, true);
}

double averaged_window_norm_serial(const Propagator& prop, double L, double T) {
  return detail::averaged_window_norm_impl(prop, L, T, false);
}

double Propagator::averaged_second_moment(double T) const {
  if (!(T > 0.0)) throw PreconditionError("averaging time must be positive");
  auto cols = detail::active_columns(overlaps_, 0.0);
  if (moment_gram_.size() == 0) {
    detail::WindowRows all;
    for (long n = -N_; n <= N_; ++n) {
      all.rows.push_back(n + N_);
      all.weights.push_back(static_cast<double>(n) * static_cast<double>(n));
    }
    moment_gram_ = detail::gram_upper(detail::weighted_block(vectors_, overlaps_, cols, all));
  }
  return detail::kernel_sum(moment_gram_, energies_, cols, T, true);
}

// ---- dynamical bound ----

double boundary_leakage(const Propagator& prop, double t_max, int probes) {
  if (probes < 1) throw PreconditionError("need at least one probe time");
  const long N = prop.N();
  std::vector<double> worst(static_cast<std::size_t>(probes) + 1, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i <= probes; ++i) {
    double t = t_max * static_cast<double>(i) / probes;
    worst[static_cast<std::size_t>(i)] = std::max(std::abs(prop.amplitude(-N, t)), std::abs(prop.amplitude(N, t)));
  }
  return *std::max_element(worst.begin(), worst.end());
}

namespace {

void check_grid(std::span<const double> T_grid) {
  if (T_grid.empty()) throw PreconditionError("empty T grid");
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    if (!(T_grid[i] > 0.0)) throw PreconditionError("T grid entries must be positive");
    if (i > 0 && !(T_grid[i] > T_grid[i - 1])) throw PreconditionError("T grid must be strictly increasing");
  }
}

}  // namespace

DynamicsResult verify_dynbound(double lambda, const RotationNumber& r, const Phase& phase,
                               std::span<const double> T_grid, const DynamicsOptions& opts) {
  if (!(lambda > 20.0) && !(opts.golden_flag && lambda > 8.0 && r == RotationNumber::golden()))
    throw PreconditionError("the dynamical bound needs lambda > 20 (or lambda > 8 for the golden mean with the golden flag)");
  check_grid(T_grid);
  if (!(opts.C1 > 0.0)) throw PreconditionError("C1 must be positive");

  DynamicsResult res;
  res.lambda = lambda;
  res.rotation = r.label();
  res.phase = phase.label();
  res.C1 = opts.C1;
  res.b_est = growth_certificate(deepest_convergents(r)).b_est;
  res.p = dynamical_exponent(lambda, res.b_est);
  res.radius_rule = "L(T) = C1 * T^p";
  const double T_max = T_grid.back();
  res.N = opts.N > 0 ? opts.N : ballistic_half_width(T_max);

  Propagator prop(build_hamiltonian(lambda, r, phase, res.N), 1);
  res.leakage = boundary_leakage(prop, kAbelianCutoff * T_max, opts.leakage_probes);
  if (res.leakage > opts.leakage_threshold) {
    long suggest = std::max(2 * res.N, ballistic_half_width(T_max));
    throw LeakageExceeded("boundary amplitude " + std::to_string(res.leakage) + " exceeds " +
                              std::to_string(opts.leakage_threshold) + " at N = " + std::to_string(res.N) +
                              "; try N = " + std::to_string(suggest),
                          suggest);
  }

  for (double T : T_grid) {
    double radius = opts.C1 * std::pow(T, res.p);
    res.T_grid.push_back(T);
    res.radius.push_back(radius);
    res.inside_prob.push_back(prop.averaged_window_norm(radius, T));
    res.sub_ballistic.push_back(prop.averaged_window_norm(std::sqrt(T), T));
  }
  res.min_inside = *std::min_element(res.inside_prob.begin(), res.inside_prob.end());
  for (std::size_t i = res.T_grid.size(); i-- > 0;) {
    if (res.inside_prob[i] < opts.C2) break;
    res.onset_T = res.T_grid[i];
  }
  return res;
}

std::vector<TransportRow> transport_diagnostics(const Propagator& prop, std::span<const double> T_grid) {
  check_grid(T_grid);
  std::vector<TransportRow> rows;
  for (double T : T_grid) {
    TransportRow row;
    row.T = T;
    row.gamma = kTransportGammas;
    for (double g : kTransportGammas) row.inside_prob.push_back(prop.averaged_window_norm(std::pow(T, g), T));
    row.second_moment = prop.averaged_second_moment(T);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TransportRow> transport_diagnostics(double lambda, const RotationNumber& r, const Phase& phase,
                                                std::span<const double> T_grid, long N) {
  if (!(lambda >= 0.0)) throw PreconditionError("coupling must be >= 0");
  check_grid(T_grid);
  if (N <= 0) N = ballistic_half_width(T_grid.back());
  Propagator prop(build_hamiltonian(lambda, r, phase, N), 1);
  return transport_diagnostics(prop, T_grid);
}

void to_json(nlohmann::json& j, const DynamicsResult& r) {
  j = nlohmann::json{{"schema_version", 1},  {"lambda", r.lambda},         {"rotation", r.rotation},
                     {"phase", r.phase},     {"N", r.N},                   {"b_est", r.b_est},
                     {"p", r.p},             {"C1", r.C1},                 {"radius_rule", r.radius_rule},
                     {"T", r.T_grid},        {"radius", r.radius},         {"inside_prob", r.inside_prob},
                     {"sub_ballistic", r.sub_ballistic}, {"leakage", r.leakage}, {"min_inside", r.min_inside},
                     {"onset_T", r.onset_T}};
}

}  // namespace qd
