#include "quasidyn/words.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <ostream>

#include "quasidyn/error.hpp"

namespace qd {

// ---- BinaryWord ----

BinaryWord::BinaryWord(std::string bits) : bits_(std::move(bits)) {
  for (char c : bits_)
    if (c != '0' && c != '1') throw PreconditionError("binary words contain only '0' and '1'");
}

BinaryWord BinaryWord::from_symbols(const std::vector<std::uint8_t>& symbols) {
  std::string s(symbols.size(), '0');
  for (std::size_t i = 0; i < symbols.size(); ++i) s[i] = symbols[i] ? '1' : '0';
  return BinaryWord(std::move(s), 0);
}

BinaryWord BinaryWord::reversed() const { return BinaryWord(std::string(bits_.rbegin(), bits_.rend()), 0); }

BinaryWord BinaryWord::rotated(std::size_t shift) const {
  if (bits_.empty()) return *this;
  shift %= bits_.size();
  return BinaryWord(bits_.substr(shift) + bits_.substr(0, shift), 0);
}

std::size_t BinaryWord::count_ones() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), '1')); }

bool BinaryWord::is_palindrome() const { return std::equal(bits_.begin(), bits_.begin() + bits_.size() / 2, bits_.rbegin()); }

std::ostream& operator<<(std::ostream& os, const BinaryWord& w) { return os << w.str(); }

// ---- Phase ----

Phase Phase::generic(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw PreconditionError("phase must satisfy 0 <= theta < 1");
  if (theta == 0.0) return zero();
  Phase p;
  p.theta_ = theta;
  return p;
}

Phase Phase::orbit(long shift) {
  Phase p;
  p.shift_ = shift;
  return p;
}

double Phase::value(const RotationNumber& r) const {
  if (!shift_) return theta_;
  auto t = deepest_convergents(r, 200);
  int K = t.depth();
  long double alpha = static_cast<long double>(t.p[K]) / static_cast<long double>(t.q[K]);
  long double x = static_cast<long double>(*shift_) * alpha;
  x -= std::floor(x);
  return static_cast<double>(x);
}

std::string Phase::label() const {
  if (!shift_) return std::to_string(theta_);
  if (*shift_ == 0) return "0";
  if (*shift_ == -1) return "1-alpha";
  return "{" + std::to_string(*shift_) + "*alpha}";
}

// ---- PotentialWindow ----

PotentialWindow::PotentialWindow(RotationNumber r, Phase phase, long lo, std::vector<std::uint8_t> values)
    : rotation_(std::move(r)), phase_(phase), lo_(lo), values_(std::move(values)) {}

int PotentialWindow::at(long n) const {
  if (!contains(n))
    throw WindowError("site " + std::to_string(n) + " outside window [" + std::to_string(lo()) + ", " +
                      std::to_string(hi()) + "]");
  return values_[static_cast<std::size_t>(n - lo_)];
}

BinaryWord PotentialWindow::word(long from, long to) const {
  if (to < from) return BinaryWord();
  if (!contains(from) || !contains(to))
    throw WindowError("word [" + std::to_string(from) + ", " + std::to_string(to) + "] leaves the window");
  std::vector<std::uint8_t> sub(values_.begin() + (from - lo_), values_.begin() + (to - lo_ + 1));
  return BinaryWord::from_symbols(sub);
}

// ---- sampling ----

namespace {

using i128 = __int128;

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// alpha lies strictly between p_K/q_K and the mediant (p_K + p_{K-1})/(q_K + q_{K-1})
// for every continuation of the expansion past depth K.
struct AlphaBracket {
  i128 p1, q1, p2, q2;
  long double approx;
  long double width;
};

AlphaBracket make_bracket(const RotationNumber& r) {
  auto t = deepest_convergents(r, 200);
  int K = t.depth();
  AlphaBracket b;
  b.p1 = t.p[K];
  b.q1 = t.q[K];
  b.p2 = static_cast<i128>(t.p[K]) + t.p[K - 1];
  b.q2 = static_cast<i128>(t.q[K]) + t.q[K - 1];
  long double a1 = static_cast<long double>(t.p[K]) / static_cast<long double>(t.q[K]);
  long double a2 = static_cast<long double>(b.p2) / static_cast<long double>(b.q2);
  b.approx = 0.5L * (a1 + a2);
  b.width = std::fabs(a1 - a2);
  return b;
}

// floor(n alpha), exact, or throws if the bracket is too wide to decide.
i128 floor_n_alpha(long n, const AlphaBracket& b) {
  if (n == 0) return 0;
  i128 n1 = static_cast<i128>(n) * b.p1, n2 = static_cast<i128>(n) * b.p2;
  // x1 = n1/q1, x2 = n2/q2; order them.
  i128 na = n1, qa = b.q1, nb = n2, qb = b.q2;
  if (na * qb > nb * qa) {
    std::swap(na, nb);
    std::swap(qa, qb);
  }
  i128 f = floor_div(na, qa);
  if (nb <= (f + 1) * qb) return f;
  throw UndecidableBoundary("floor(n*alpha) undecidable at n = " + std::to_string(n) +
                            " with the available convergents");
}

int sturmian_zero_phase(long n, const AlphaBracket& b) {
  return static_cast<int>(floor_n_alpha(n + 1, b) - floor_n_alpha(n, b));
}

long double distance_to_integer(long double x) { return std::fabs(x - std::nearbyint(x)); }

int sturmian_generic_phase(long n, double theta, const AlphaBracket& b) {
  long double alpha = b.approx;
  long double x = static_cast<long double>(n) * alpha + static_cast<long double>(theta);
  long double y = x + alpha;
  long double err = (std::fabs(static_cast<long double>(n)) + 2.0L) * (b.width + 4.0L * LDBL_EPSILON) +
                    8.0L * LDBL_EPSILON * (std::fabs(x) + 1.0L);
  if (distance_to_integer(x) <= err || distance_to_integer(y) <= err)
    throw UndecidableBoundary("n*alpha + theta (mod 1) collides with an endpoint of [1-alpha, 1) at n = " +
                              std::to_string(n));
  return static_cast<int>(std::floor(y) - std::floor(x));
}

}  // namespace

PotentialWindow sample_potential(const RotationNumber& r, const Phase& phase, long lo, long hi) {
  if (hi < lo) throw PreconditionError("sample window needs hi >= lo");
  AlphaBracket b = make_bracket(r);
  std::vector<std::uint8_t> values(static_cast<std::size_t>(hi - lo + 1));
  double theta = phase.on_orbit() ? 0.0 : phase.value(r);
  for (long n = lo; n <= hi; ++n) {
    int v = phase.on_orbit() ? sturmian_zero_phase(n + phase.orbit_shift(), b) : sturmian_generic_phase(n, theta, b);
    values[static_cast<std::size_t>(n - lo)] = static_cast<std::uint8_t>(v);
  }
  return PotentialWindow(r, phase, lo, std::move(values));
}

PotentialWindow sample_potential(const RotationNumber& r, double theta, long lo, long hi) {
  return sample_potential(r, Phase::generic(theta), lo, hi);
}

// ---- standard words ----

BinaryWord standard_word(const RotationNumber& r, int k) {
  if (k < 0) throw PreconditionError("standard words are indexed from 0");
  std::string prev2 = "0";  // s_0
  if (k == 0) return BinaryWord(prev2);
  std::string prev = std::string(static_cast<std::size_t>(r.coefficient(1) - 1), '0') + "1";  // s_1
  for (int j = 2; j <= k; ++j) {
    std::string next;
    auto a = r.coefficient(j);
    next.reserve(static_cast<std::size_t>(a) * prev.size() + prev2.size());
    for (std::int64_t i = 0; i < a; ++i) next += prev;
    next += prev2;
    prev2 = std::move(prev);
    prev = std::move(next);
  }
  return BinaryWord(prev);
}

BinaryWord previous_block_word(const RotationNumber& r, int k) {
  if (k == 0) return BinaryWord("1");
  return standard_word(r, k - 1);
}

namespace {

std::int64_t q_at(const RotationNumber& r, int k) {
  if (k <= 0) return 1;
  return convergents(r, k).q[k];
}

void require_factor_margin(const PotentialWindow& window, int n) {
  int m = 0;
  while (q_at(window.rotation(), m) < n) ++m;
  long need = 2 * (static_cast<long>(n) + q_at(window.rotation(), m));
  if (window.size() < need)
    throw WindowError("window of length " + std::to_string(window.size()) + " too short for factors of length " +
                      std::to_string(n) + " (need " + std::to_string(need) + ")");
}

}  // namespace

std::set<BinaryWord> factors(const PotentialWindow& window, int n) {
  if (n < 0) throw PreconditionError("factor length must be >= 0");
  require_factor_margin(window, n);
  std::set<BinaryWord> out;
  BinaryWord all = window.word(window.lo(), window.hi());
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= all.size(); ++i) out.insert(all.substr(i, n));
  return out;
}

BinaryWord right_special(const PotentialWindow& window, int n) {
  auto longer = factors(window, n + 1);
  auto shorter = factors(window, n);
  std::vector<BinaryWord> special;
  for (const auto& u : shorter)
    if (longer.count(u + BinaryWord("0")) && longer.count(u + BinaryWord("1"))) special.push_back(u);
  if (special.size() != 1)
    throw Error("expected exactly one right-special factor of length " + std::to_string(n) + ", found " +
                std::to_string(special.size()));
  return special.front();
}

bool palindrome_prefix_check(const RotationNumber& r, int k) {
  if (k < 1) throw PreconditionError("palindrome check needs k >= 1");
  auto q = q_at(r, k);
  if (q < 2) throw PreconditionError("palindrome check needs q_k >= 2");
  BinaryWord s = standard_word(r, k);
  return s.substr(0, static_cast<std::size_t>(q - 2)).is_palindrome();
}

BinaryWord exceptional_word(const RotationNumber& r, int k) {
  BinaryWord s = standard_word(r, k);
  BinaryWord head(s[s.size() - 1] ? "0" : "1");
  return head + s.substr(0, s.size() - 1);
}

std::vector<std::size_t> kmp_search(const std::string& text, const std::string& pattern) {
  std::vector<std::size_t> hits;
  const std::size_t m = pattern.size();
  if (m == 0) {
    for (std::size_t i = 0; i < text.size(); ++i) hits.push_back(i);
    return hits;
  }
  std::vector<std::size_t> fail(m, 0);
  for (std::size_t i = 1, len = 0; i < m;) {
    if (pattern[i] == pattern[len]) {
      fail[i++] = ++len;
    } else if (len > 0) {
      len = fail[len - 1];
    } else {
      fail[i++] = 0;
    }
  }
  for (std::size_t i = 0, j = 0; i < text.size();) {
    if (text[i] == pattern[j]) {
      ++i;
      if (++j == m) {
        hits.push_back(i - m);
        j = fail[j - 1];
      }
    } else if (j > 0) {
      j = fail[j - 1];
    } else {
      ++i;
    }
  }
  return hits;
}

bool is_conjugate(const BinaryWord& u, const BinaryWord& v) {
  if (u.size() != v.size()) return false;
  if (u.empty()) return true;
  return !kmp_search(u.str() + u.str(), v.str()).empty();
}

PhaseWords phase_words(const RotationNumber& r, const Phase& phase, int k) {
  long q = static_cast<long>(q_at(r, k));
  auto window = sample_potential(r, phase, -q + 1, q);
  return {window.word(1, q), window.word(-q + 1, 0)};
}

std::vector<long> find_occurrences(const PotentialWindow& window, const BinaryWord& pattern) {
  std::vector<long> sites;
  if (static_cast<long>(pattern.size()) > window.size()) return sites;
  auto text = window.word(window.lo(), window.hi());
  for (auto i : kmp_search(text.str(), pattern.str())) sites.push_back(window.lo() + static_cast<long>(i));
  return sites;
}

}  // namespace qd
