#include <doctest.h>

#include <cmath>

#include "quasidyn/dynamics.hpp"
#include "quasidyn/error.hpp"

using namespace qd;

namespace {

WavePacket delta(long N, long site) {
  WavePacket w;
  w.N = N;
  w.amplitudes = Eigen::VectorXcd::Zero(2 * N + 1);
  w.amplitudes(site + N) = 1.0;
  return w;
}

Eigen::VectorXcd delta_vec(long N, long site) { return delta(N, site).amplitudes; }

}  // namespace

TEST_CASE("hamiltonian construction") {
  auto g = RotationNumber::golden();
  auto h = build_hamiltonian(24.0, g, Phase::zero(), 5);
  CHECK(h.size() == 11);
  std::vector<double> want{24, 0, 24, 24, 0};
  for (long n = 1; n <= 5; ++n) CHECK(h.diag[h.index(n)] == want[n - 1]);
  Eigen::MatrixXd d = h.dense();
  CHECK((d - d.transpose()).norm() == 0.0);
  CHECK_THROWS_AS(build_hamiltonian(24.0, g, Phase::zero(), 0), PreconditionError);

  auto free = build_hamiltonian(0.0, g, Phase::zero(), 30);
  Propagator p(free);
  CHECK(p.energies().minCoeff() >= -2.0 - 1e-12);
  CHECK(p.energies().maxCoeff() <= 2.0 + 1e-12);
  Propagator q(h);
  CHECK(q.energies().minCoeff() >= -2.0 - 1e-12);
  CHECK(q.energies().maxCoeff() <= 26.0 + 1e-12);
}

TEST_CASE("window norms") {
  CHECK(window_norm_sq(delta(10, 1), 2.5) == 1.0);
  CHECK(window_norm_sq(delta(10, 3), 2.5) == 0.5);
  CHECK(window_norm_sq(delta(10, 3), 3.0) == 1.0);
  CHECK(window_norm_sq(delta(10, -3), 2.25) == 0.25);
  CHECK(window_norm_sq(delta(10, 10), 10.0) == 1.0);
  CHECK(window_norm_sq(delta(10, 10), 1e6) == 1.0);
  CHECK_THROWS_AS(window_norm_sq(delta(10, 0), -1.0), PreconditionError);
}

TEST_CASE("window norm is monotone in L and reaches the full norm") {
  auto h = build_hamiltonian(24.0, RotationNumber::golden(), Phase::zero(), 40);
  Propagator p(h);
  auto psi = p.evolve(3.0);
  double prev = 0.0;
  for (double L = 0.0; L <= 42.0; L += 0.3) {
    double v = window_norm_sq(psi, L);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  CHECK(window_norm_sq(psi, 41.0) == doctest::Approx(psi.norm_sq()).epsilon(1e-15));
}

TEST_CASE("Abelian average quadrature") {
  for (double T : {0.5, 3.0, 40.0}) {
    double dt = T / 200.0;
    long n = static_cast<long>(std::ceil(15.0 * T / dt)) + 1;
    std::vector<double> one(n, 1.0), lin(n), dec(n);
    for (long i = 0; i < n; ++i) {
      double t = dt * i;
      lin[i] = t;
      dec[i] = std::exp(-2.0 * t / T);
    }
    CHECK(std::fabs(abelian_average(one, dt, T) - 1.0) < 1e-6);
    CHECK(std::fabs(abelian_average(lin, dt, T) - T / 2.0) < 1e-6 * std::max(1.0, T));
    CHECK(std::fabs(abelian_average(dec, dt, T) - 0.5) < 1e-5);
    double fine = T / 1000.0;
    long m = static_cast<long>(std::ceil(15.0 * T / fine)) + 1;
    std::vector<double> dec_fine(m);
    for (long i = 0; i < m; ++i) dec_fine[i] = std::exp(-2.0 * fine * i / T);
    CHECK(std::fabs(abelian_average(dec_fine, fine, T) - 0.5) < 1e-6);
    // monotone under pointwise order
    std::vector<double> smaller(n);
    for (long i = 0; i < n; ++i) smaller[i] = 0.5 * dec[i];
    CHECK(abelian_average(smaller, dt, T) <= abelian_average(dec, dt, T));
  }
  std::vector<double> coarse(100, 1.0);
  CHECK_THROWS_AS(abelian_average(coarse, 1.0, 10.0), InsufficientSampling);
  std::vector<double> short_run(50, 1.0);
  CHECK_THROWS_AS(abelian_average(short_run, 0.01, 10.0), InsufficientSampling);
}

TEST_CASE("evolution: identity at t = 0, unitarity, Taylor agreement") {
  auto h = build_hamiltonian(24.0, RotationNumber::golden(), Phase::zero(), 60);
  Propagator p(h);
  auto psi0 = p.evolve(0.0);
  CHECK((psi0.amplitudes - delta_vec(60, 1)).norm() < 1e-12);
  for (double t : {0.1, 1.0, 10.0, 100.0, 1e4}) CHECK(std::fabs(p.evolve(t).norm_sq() - 1.0) < 1e-10);
  const double t = 0.01;
  auto series = taylor_evolve(h, delta_vec(60, 1), t);
  CHECK((p.evolve(t).amplitudes - series).norm() < 1e-8);
  // second-order truncation: remainder scales like t^3
  Eigen::VectorXcd d1 = delta_vec(60, 1);
  Eigen::VectorXcd hd = h.apply(d1), hhd = h.apply(hd);
  auto remainder = [&](double s) {
    Eigen::VectorXcd approx = d1 - std::complex<double>(0, s) * hd - 0.5 * s * s * hhd;
    return (p.evolve(s).amplitudes - approx).norm();
  };
  double c = remainder(t) / (t * t * t);
  double hn = h.dense().operatorNorm();
  CHECK(c <= hn * hn * hn / 6.0 * 1.0001);
  CHECK(remainder(t / 2) / std::pow(t / 2, 3) == doctest::Approx(c).epsilon(0.05));
  CHECK(std::abs(p.amplitude(1, 2.0) - p.evolve(2.0).at(1)) < 1e-12);
}

TEST_CASE("generic initial vector") {
  auto h = build_hamiltonian(10.0, RotationNumber::silver(), Phase::zero(), 20);
  Eigen::VectorXd init = Eigen::VectorXd::Zero(h.size());
  init(h.index(0)) = std::sqrt(0.5);
  init(h.index(1)) = std::sqrt(0.5);
  Propagator p(h, init);
  CHECK(p.overlaps().squaredNorm() == doctest::Approx(1.0));
  CHECK(std::abs(p.evolve(0.0).at(0) - std::sqrt(0.5)) < 1e-12);
}

TEST_CASE("closed-form averages agree with time-domain quadrature") {
  auto h = build_hamiltonian(24.0, RotationNumber::golden(), Phase::generic(0.3), 40);
  Propagator p(h);
  for (double T : {0.7, 2.0, 5.0}) {
    for (double L : {0.0, 1.5, 3.0, 7.25, 60.0}) {
      double fast = p.averaged_window_norm(L, T);
      CHECK(fast >= 0.0);
      CHECK(fast <= 1.0 + 1e-12);
      CHECK(std::fabs(fast - averaged_window_norm_serial(p, L, T)) < 1e-13);
      CHECK(std::fabs(fast - averaged_window_norm_reference(p, L, T)) < 1e-6);
    }
    CHECK(std::fabs(p.averaged_second_moment(T) - averaged_second_moment_reference(p, T)) <
          1e-6 * std::max(1.0, p.averaged_second_moment(T)));
  }
  CHECK(p.averaged_window_norm(100.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("small-T limit keeps the packet at site 1") {
  auto h = build_hamiltonian(24.0, RotationNumber::golden(), Phase::zero(), 30);
  Propagator p(h);
  CHECK(p.averaged_window_norm(1.0, 1e-6) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("free propagation stays inside the ballistic cone") {
  auto h = build_hamiltonian(0.0, RotationNumber::golden(), Phase::zero(), 200);
  Propagator p(h);
  for (double t : {20.0, 40.0, 60.0}) {
    auto psi = p.evolve(t);
    CHECK(1.0 - window_norm_sq(psi, 2.5 * t) <= 1e-4);
  }
}

TEST_CASE("dynamical exponent and ballistic rule") {
  CHECK(dynamical_exponent(24.0, 2.0) == doctest::Approx(6.0 * std::log(2.0) / std::log(16.0 / 3.0)));
  CHECK(dynamical_exponent(24.0, 2.0) == doctest::Approx(2.4845).epsilon(1e-4));
  CHECK_THROWS_AS(dynamical_exponent(10.0, 2.0), PreconditionError);
  CHECK(ballistic_half_width(100.0) == 3050);
}

TEST_CASE("verify_dynbound on a short grid") {
  std::vector<double> grid{1.0, 2.0, 5.0};
  auto res = verify_dynbound(24.0, RotationNumber::golden(), Phase::zero(), grid);
  CHECK(res.N == ballistic_half_width(5.0));
  CHECK(res.p == doctest::Approx(2.48443).epsilon(1e-5));
  CHECK(res.b_est == 2.0);
  CHECK(res.leakage < 1e-8);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(res.inside_prob[i] >= 0.0);
    CHECK(res.inside_prob[i] <= 1.0);
    CHECK(res.radius[i] == doctest::Approx(std::pow(grid[i], res.p)));
  }
  CHECK(res.inside_prob[2] >= 1.0 - 1e-6);
  CHECK(res.onset_T == 1.0);
  nlohmann::json j = res;
  CHECK(j["schema_version"] == 1);
  CHECK_THROWS_AS(verify_dynbound(15.0, RotationNumber::silver(), Phase::zero(), grid), PreconditionError);
  CHECK_THROWS_AS(verify_dynbound(24.0, RotationNumber::golden(), Phase::zero(), std::vector<double>{2.0, 1.0}),
                  PreconditionError);
}

TEST_CASE("leakage forces a larger lattice") {
  DynamicsOptions o;
  o.N = 15;
  std::vector<double> grid{5.0};
  try {
    verify_dynbound(24.0, RotationNumber::golden(), Phase::zero(), grid, o);
    FAIL("expected leakage");
  } catch (const LeakageExceeded& e) {
    CHECK(e.suggested_half_width() >= ballistic_half_width(5.0));
  }
}

TEST_CASE("transport diagnostics") {
  std::vector<double> grid{2.0, 8.0};
  auto rows = transport_diagnostics(24.0, RotationNumber::golden(), Phase::zero(), grid, 300);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    REQUIRE(r.inside_prob.size() == 4);
    for (std::size_t i = 1; i < r.inside_prob.size(); ++i) CHECK(r.inside_prob[i] >= r.inside_prob[i - 1] - 1e-14);
    CHECK(r.second_moment >= 0.0);
  }
  auto free = transport_diagnostics(0.0, RotationNumber::golden(), Phase::zero(), std::vector<double>{4.0}, 200);
  CHECK(free[0].second_moment > rows[0].second_moment);
}
