#include "quasidyn/rotations.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "quasidyn/error.hpp"

namespace qd {

RotationNumber::RotationNumber(std::vector<std::int64_t> prefix, std::vector<std::int64_t> periodic_tail)
    : prefix_(std::move(prefix)), tail_(std::move(periodic_tail)) {
  if (prefix_.empty() && tail_.empty())
    throw PreconditionError("rotation number needs at least one coefficient");
  for (auto a : prefix_)
    if (a < 1) throw PreconditionError("continued fraction coefficients must be >= 1");
  for (auto a : tail_)
    if (a < 1) throw PreconditionError("continued fraction coefficients must be >= 1");
}

RotationNumber RotationNumber::golden() { return RotationNumber({}, {1}); }

RotationNumber RotationNumber::silver() { return RotationNumber({}, {2}); }

RotationNumber RotationNumber::from_double(double x, int max_depth) {
  if (!(x > 0.0 && x < 1.0)) throw PreconditionError("rotation number must lie in (0,1)");
  std::vector<std::int64_t> coeffs;
  long double rem = x;
  while (static_cast<int>(coeffs.size()) < max_depth) {
    long double inv = 1.0L / rem;
    long double a = std::floor(inv);
    if (a > 1e12L) break;
    coeffs.push_back(static_cast<std::int64_t>(a));
    rem = inv - a;
    if (rem < 1e-12L) break;
  }
  RotationNumber r(std::move(coeffs));
  r.approximate_ = true;
  return r;
}

std::int64_t RotationNumber::coefficient(int k) const {
  if (k < 1) throw PreconditionError("coefficients are indexed from 1");
  auto idx = static_cast<std::size_t>(k - 1);
  if (idx < prefix_.size()) return prefix_[idx];
  if (tail_.empty())
    throw DepthExhausted("coefficient a_" + std::to_string(k) + " requested but only " +
                         std::to_string(prefix_.size()) + " are materialized");
  return tail_[(idx - prefix_.size()) % tail_.size()];
}

int RotationNumber::truncation_depth() const {
  if (!tail_.empty()) return std::numeric_limits<int>::max();
  return static_cast<int>(prefix_.size());
}

std::string RotationNumber::label() const {
  if (prefix_.empty() && tail_ == std::vector<std::int64_t>{1}) return "golden";
  if (prefix_.empty() && tail_ == std::vector<std::int64_t>{2}) return "silver";
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < prefix_.size(); ++i) os << (i ? "," : "") << prefix_[i];
  if (!tail_.empty()) {
    os << ';';
    for (std::size_t i = 0; i < tail_.size(); ++i) os << (i ? "," : "") << tail_[i];
  }
  os << ']';
  return os.str();
}

void to_json(nlohmann::json& j, const RotationNumber& r) {
  j = nlohmann::json{{"coefficients", r.prefix()}, {"periodic_tail", r.periodic_tail()}};
}

void from_json(const nlohmann::json& j, RotationNumber& r) {
  std::vector<std::int64_t> prefix = j.value("coefficients", std::vector<std::int64_t>{});
  std::vector<std::int64_t> tail = j.value("periodic_tail", std::vector<std::int64_t>{});
  r = RotationNumber(std::move(prefix), std::move(tail));
}

double real_value(const RotationNumber& r, int K) {
  if (K < 1) throw PreconditionError("depth must be >= 1");
  if (K > r.truncation_depth())
    throw DepthExhausted("depth " + std::to_string(K) + " exceeds available coefficients");
  long double x = 0.0L;
  for (int k = K; k >= 1; --k) x = 1.0L / (static_cast<long double>(r.coefficient(k)) + x);
  return static_cast<double>(x);
}

namespace {

bool step(std::int64_t a, std::int64_t prev, std::int64_t prev2, std::int64_t& out) {
  std::int64_t prod;
  if (__builtin_mul_overflow(a, prev, &prod)) return false;
  return !__builtin_add_overflow(prod, prev2, &out);
}

}  // namespace

ConvergentTable convergents(const RotationNumber& r, int K) {
  if (K < 1) throw PreconditionError("convergent depth must be >= 1");
  ConvergentTable t;
  t.p = {0, 1};
  t.q = {1, r.coefficient(1)};
  for (int k = 2; k <= K; ++k) {
    std::int64_t a = r.coefficient(k);
    std::int64_t pk, qk;
    if (!step(a, t.p[k - 1], t.p[k - 2], pk) || !step(a, t.q[k - 1], t.q[k - 2], qk))
      throw OverflowError("convergent p_" + std::to_string(k) + "/q_" + std::to_string(k) +
                          " overflows 64-bit integers");
    t.p.push_back(pk);
    t.q.push_back(qk);
  }
  return t;
}

ConvergentTable deepest_convergents(const RotationNumber& r, int max_depth) {
  int cap = std::min(max_depth, r.truncation_depth());
  ConvergentTable t;
  t.p = {0, 1};
  t.q = {1, r.coefficient(1)};
  for (int k = 2; k <= cap; ++k) {
    std::int64_t a = r.coefficient(k);
    std::int64_t pk, qk;
    if (!step(a, t.p[k - 1], t.p[k - 2], pk) || !step(a, t.q[k - 1], t.q[k - 2], qk)) break;
    t.p.push_back(pk);
    t.q.push_back(qk);
  }
  return t;
}

GrowthCertificate growth_certificate(const ConvergentTable& t) {
  if (t.depth() < 1) throw PreconditionError("growth certificate needs depth >= 1");
  GrowthCertificate g;
  g.depth = t.depth();
  for (int k = 1; k <= t.depth(); ++k) {
    double b = std::pow(static_cast<double>(t.q[k]) + 1.0, 1.0 / k);
    if (b > g.b_est) {
      g.b_est = b;
      g.attained_at = k;
    }
  }
  return g;
}

double coefficient_product(const RotationNumber& r, int k) {
  double prod = 1.0;
  for (int i = 1; i <= k; ++i) prod *= static_cast<double>(r.coefficient(i));
  return prod;
}

}  // namespace qd
