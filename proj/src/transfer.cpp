#include "quasidyn/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quasidyn/error.hpp"

namespace qd {

namespace {

constexpr double kRenormThreshold = 1e150;

double scaled_exp(double mantissa, double log_scale) {
  if (mantissa == 0.0) return 0.0;
  double lg = std::log(std::fabs(mantissa)) + log_scale;
  if (lg > 709.0) return std::copysign(std::numeric_limits<double>::infinity(), mantissa);
  return mantissa * std::exp(log_scale);
}

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

Mat2 step_derivative() {
  Mat2 d = Mat2::Zero();
  d(0, 0) = 1.0;
  return d;
}

Mat2 step_for(double E, double potential) {
  Mat2 t;
  t << E - potential, -1.0, 1.0, 0.0;
  return t;
}

// Products are carried in extended precision: near the spectrum M_k is far from normal
// (entries ~ 1e4 around a trace of order 1), so double rounding in the entries swamps the trace.
using WideMat = Eigen::Matrix<long double, 2, 2>;

WideMat widen(const Mat2& a) { return a.cast<long double>(); }

WideMat wide_adjugate(const WideMat& a) {
  WideMat r;
  r << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return r;
}

struct Wide {
  WideMat m = WideMat::Identity();
  WideMat dm = WideMat::Zero();
  double log_scale = 0.0;
  long site_count = 0;

  void renormalize() {
    long double big = std::max(m.cwiseAbs().maxCoeff(), dm.cwiseAbs().maxCoeff());
    if (big > kRenormThreshold) {
      m /= big;
      dm /= big;
      log_scale += static_cast<double>(std::log(big));
    }
  }
  Wide operator*(const Wide& rhs) const {
    Wide out;
    out.m = m * rhs.m;
    out.dm = dm * rhs.m + m * rhs.dm;
    out.log_scale = log_scale + rhs.log_scale;
    out.site_count = site_count + rhs.site_count;
    out.renormalize();
    return out;
  }
  Wide inverse() const {
    Wide out = *this;
    out.m = wide_adjugate(m);
    out.dm = wide_adjugate(dm);
    return out;
  }
  Wide power(long p) const {
    if (p < 0) return inverse().power(-p);
    Wide out;
    for (long i = 0; i < p; ++i) out = out * *this;
    return out;
  }
  TransferState narrow() const {
    TransferState s;
    s.m = m.cast<double>();
    s.dm = dm.cast<double>();
    s.log_scale = log_scale;
    s.site_count = site_count;
    return s;
  }
  TraceValue trace_value(int k, int p) const {
    TraceValue t;
    t.k = k;
    t.p = p;
    t.scaled_value = static_cast<double>(m.trace());
    t.scaled_derivative = static_cast<double>(dm.trace());
    t.log_scale = log_scale;
    t.value = scaled_exp(t.scaled_value, log_scale);
    t.derivative = scaled_exp(t.scaled_derivative, log_scale);
    return t;
  }
};

Wide wide_transfer(double E, long n, double lambda, const PotentialWindow& window) {
  Wide s;
  const WideMat dstep = widen(step_derivative());
  if (n >= 1) {
    if (!window.contains(1) || !window.contains(n))
      throw WindowError("transfer over [1, " + std::to_string(n) + "] leaves the window");
    for (long site = 1; site <= n; ++site) {
      WideMat t = widen(step_for(E, lambda * window.at(site)));
      s.dm = dstep * s.m + t * s.dm;
      s.m = t * s.m;
      s.renormalize();
    }
  } else if (n <= -1) {
    if (!window.contains(0) || !window.contains(n + 1))
      throw WindowError("transfer over [" + std::to_string(n + 1) + ", 0] leaves the window");
    WideMat dinv = WideMat::Zero();
    dinv(1, 1) = 1.0L;
    for (long site = 0; site >= n + 1; --site) {
      WideMat tinv = wide_adjugate(widen(step_for(E, lambda * window.at(site))));
      s.dm = dinv * s.m + tinv * s.dm;
      s.m = tinv * s.m;
      s.renormalize();
    }
  }
  s.site_count = std::labs(n);
  return s;
}

Wide wide_canonical(double E, int k, double lambda, const RotationNumber& r) {
  if (k < -1) throw PreconditionError("canonical matrices start at k = -1");
  Wide prev;  // M_{-1}
  prev.m << 1.0L, -static_cast<long double>(lambda), 0.0L, 1.0L;
  if (k == -1) return prev;
  Wide cur;  // M_0
  cur.m = widen(step_for(E, 0.0));
  cur.dm = widen(step_derivative());
  cur.site_count = 1;
  for (int j = 0; j < k; ++j) {
    Wide next = prev * cur.power(r.coefficient(j + 1));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

double operator_norm(const Mat2& a) {
  double s1 = std::hypot(a(0, 0) + a(1, 1), a(0, 1) - a(1, 0));
  double s2 = std::hypot(a(0, 0) - a(1, 1), a(0, 1) + a(1, 0));
  return 0.5 * (s1 + s2);
}

Mat2 adjugate(const Mat2& a) {
  Mat2 r;
  r << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return r;
}

double TransferState::trace() const { return scaled_exp(m.trace(), log_scale); }

double TransferState::trace_derivative() const { return scaled_exp(dm.trace(), log_scale); }

double TransferState::log_norm() const { return std::log(operator_norm(m)) + log_scale; }

double TransferState::determinant() const { return m.determinant() * std::exp(2.0 * log_scale); }

void TransferState::renormalize() {
  double big = std::max(m.cwiseAbs().maxCoeff(), dm.cwiseAbs().maxCoeff());
  if (big > kRenormThreshold) {
    m /= big;
    dm /= big;
    log_scale += std::log(big);
  }
}

TransferState TransferState::operator*(const TransferState& rhs) const {
  TransferState out;
  out.m = m * rhs.m;
  out.dm = dm * rhs.m + m * rhs.dm;
  out.log_scale = log_scale + rhs.log_scale;
  out.site_count = site_count + rhs.site_count;
  out.renormalize();
  return out;
}

TransferState TransferState::inverse() const {
  // (e^s m)^{-1} = e^s adj(m) when det(e^s m) = 1; adj is linear so d(adj m) = adj(dm).
  TransferState out;
  out.m = adjugate(m);
  out.dm = adjugate(dm);
  out.log_scale = log_scale;
  out.site_count = site_count;
  return out;
}

TransferState TransferState::power(long p) const {
  if (p < 0) return inverse().power(-p);
  TransferState out;
  for (long i = 0; i < p; ++i) out = out * *this;
  return out;
}

Mat2 step_matrix(double E, long m, double lambda, const PotentialWindow& window) {
  return step_for(E, lambda * window.at(m));
}

TransferState transfer(double E, long n, double lambda, const PotentialWindow& window) {
  return wide_transfer(E, n, lambda, window).narrow();
}

TransferState canonical_Mk(double E, int k, double lambda, const RotationNumber& r) {
  return wide_canonical(E, k, lambda, r).narrow();
}

TraceValue trace_fn(double E, int k, int p, double lambda, const RotationNumber& r) {
  if (k < 0) throw PreconditionError("trace functions need k >= 0");
  if (p < -1) throw PreconditionError("trace functions need p >= -1");
  // M_{k-1} M_k^{-1} = M_{k-1}^{1-a_k} M_{k-2}^{-1} has the trace of M_{k-2} M_{k-1}^{a_k-1};
  // forming the inverse product directly cancels catastrophically once the norms grow.
  if (p == -1 && k >= 1) {
    auto t = trace_fn(E, k - 1, static_cast<int>(r.coefficient(k)) - 1, lambda, r);
    t.k = k;
    t.p = p;
    return t;
  }
  Wide prod = wide_canonical(E, k - 1, lambda, r) * wide_canonical(E, k, lambda, r).power(p);
  return prod.trace_value(k, p);
}

double fricke_residual(double E, int k, int p, double lambda, const RotationNumber& r) {
  auto x = trace_fn(E, k + 1, 0, lambda, r);
  auto y = trace_fn(E, k, p, lambda, r);
  auto z = trace_fn(E, k, p + 1, lambda, r);
  struct Term {
    double sign;
    double log_abs;
  };
  auto term = [](double mantissa, double log_scale) {
    if (mantissa == 0.0) return Term{0.0, -std::numeric_limits<double>::infinity()};
    return Term{mantissa > 0 ? 1.0 : -1.0, std::log(std::fabs(mantissa)) + log_scale};
  };
  Term terms[5] = {
      term(x.scaled_value * x.scaled_value, 2 * x.log_scale),
      term(y.scaled_value * y.scaled_value, 2 * y.log_scale),
      term(z.scaled_value * z.scaled_value, 2 * z.log_scale),
      term(-x.scaled_value * y.scaled_value * z.scaled_value, x.log_scale + y.log_scale + z.log_scale),
      term(-(4.0 + lambda * lambda), 0.0),
  };
  double ref = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) ref = std::max(ref, t.log_abs);
  double sum = 0.0;
  for (const auto& t : terms)
    if (t.sign != 0.0) sum += t.sign * std::exp(t.log_abs - ref);
  return std::fabs(sum);
}

TraceValue trace_phase(double E, int k, double lambda, const PotentialWindow& window, Side side) {
  long q = k <= 0 ? 1 : static_cast<long>(convergents(window.rotation(), k).q[k]);
  return wide_transfer(E, side == Side::kRight ? q : -q, lambda, window).trace_value(k, 0);
}

std::vector<double> prefix_log_norms(double E, double lambda, const PotentialWindow& window, long n_max,
                                     Direction dir) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(n_max, 0L)));
  if (n_max <= 0) return out;
  long last = dir == Direction::kPositive ? n_max : -n_max + 1;
  long first = dir == Direction::kPositive ? 1 : 0;
  if (!window.contains(first) || !window.contains(last))
    throw WindowError("norm accumulant needs sites up to " + std::to_string(last) + " in the window");
  Mat2 m = Mat2::Identity();
  double log_scale = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    long site = dir == Direction::kPositive ? n : 1 - n;
    Mat2 t = step_for(E, lambda * window.at(site));
    m = (dir == Direction::kPositive ? t : adjugate(t)) * m;
    double big = m.cwiseAbs().maxCoeff();
    if (big > kRenormThreshold) {
      m /= big;
      log_scale += std::log(big);
    }
    out.push_back(std::log(operator_norm(m)) + log_scale);
  }
  return out;
}

NormAccumulant norm_accumulant(double E, double lambda, const PotentialWindow& window, double L, Direction dir) {
  if (!(L >= 1.0)) throw PreconditionError("norm accumulant needs L >= 1");
  long fl = static_cast<long>(std::floor(L));
  double frac = L - static_cast<double>(fl);
  long needed = frac > 0.0 ? fl : fl - 1;
  auto logs = prefix_log_norms(E, lambda, window, needed, dir);
  double log_sum = -std::numeric_limits<double>::infinity();
  for (long n = 1; n <= fl - 1; ++n) log_sum = log_add(log_sum, 2.0 * logs[static_cast<std::size_t>(n - 1)]);
  if (frac > 0.0) log_sum = log_add(log_sum, std::log(frac) + 2.0 * logs[static_cast<std::size_t>(fl - 1)]);
  NormAccumulant acc;
  acc.L = L;
  acc.log_value = 0.5 * log_sum;
  acc.value = std::exp(acc.log_value);
  return acc;
}

bool KeyEstimate::holds() const {
  if (lhs <= 0.0) return true;
  return log_abs_lhs <= log_rhs;
}

KeyEstimate key_estimate_check(double E, long L, double lambda, const PotentialWindow& window) {
  if (L < 1) throw PreconditionError("key estimate needs L >= 1");
  auto s = transfer(E, L, lambda, window);
  auto acc = norm_accumulant(E, lambda, window, static_cast<double>(L + 1), Direction::kPositive);
  KeyEstimate k;
  double d = s.dm.trace();
  k.log_abs_lhs = d == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::fabs(d)) + s.log_scale;
  k.lhs = s.trace_derivative();
  k.log_rhs = std::log(4.0) + 3.0 * acc.log_value;
  k.rhs = k.log_rhs > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(k.log_rhs);
  return k;
}

LengthScale length_scale(double E, double lambda, const PotentialWindow& window, double eps, Direction dir) {
  if (!(eps > 0.0)) throw PreconditionError("length scale needs eps > 0");
  Mat2 first = step_matrix(E, 1, lambda, window);
  const double log_target_sq = 2.0 * (std::log(2.0 * operator_norm(adjugate(first))) - std::log(eps));
  long n_max = dir == Direction::kPositive ? window.hi() : 1 - window.lo();
  auto logs = prefix_log_norms(E, lambda, window, n_max, dir);
  const double sign = dir == Direction::kPositive ? 1.0 : -1.0;
  // On [m, m+1): S(L) = S(m) + (L - m) ||M(m)||^2 with S(m) = sum_{n<m} ||M(n)||^2.
  double log_s = -std::numeric_limits<double>::infinity();
  for (long m = 1; m <= n_max; ++m) {
    double log_term = 2.0 * logs[static_cast<std::size_t>(m - 1)];
    double log_next = log_add(log_s, log_term);
    if (log_next >= log_target_sq) {
      // fraction = (target^2 - S(m)) / ||M(m)||^2
      double remaining = log_target_sq + std::log1p(-std::exp(log_s - log_target_sq));
      double frac = std::exp(remaining - log_term);
      return {sign * (static_cast<double>(m) + std::clamp(frac, 0.0, 1.0)), false};
    }
    log_s = log_next;
  }
  return {sign * static_cast<double>(n_max + 1), true};
}

std::vector<TraceValue> trace_sweep(std::span<const double> energies, int k, int p, double lambda,
                                    const RotationNumber& r) {
  std::vector<TraceValue> out(energies.size());
  const long n = static_cast<long>(energies.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = trace_fn(energies[static_cast<std::size_t>(i)], k, p, lambda, r);
  return out;
}

std::vector<TraceValue> trace_sweep_serial(std::span<const double> energies, int k, int p, double lambda,
                                           const RotationNumber& r) {
  std::vector<TraceValue> out;
  out.reserve(energies.size());
  for (double E : energies) out.push_back(trace_fn(E, k, p, lambda, r));
  return out;
}

}  // namespace qd
