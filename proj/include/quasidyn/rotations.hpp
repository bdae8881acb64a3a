#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace qd {

// An irrational rotation number in (0,1), stored exactly as its continued
// fraction coefficients a_1, a_2, ...: a finite prefix followed by an optional
// periodic tail. Without a tail only the prefix is available (truncation depth
// = prefix length).
class RotationNumber {
 public:
  RotationNumber(std::vector<std::int64_t> prefix, std::vector<std::int64_t> periodic_tail = {});

  static RotationNumber golden();  // (sqrt5 - 1)/2 = [0; 1, 1, 1, ...]
  static RotationNumber silver();  // sqrt2 - 1 = [0; 2, 2, 2, ...]

  // Expands x to at most max_depth coefficients, stopping once the remainder
  // drops below 1e-12. The result is flagged approximate.
  static RotationNumber from_double(double x, int max_depth = 40);

  // a_k for k >= 1. Throws DepthExhausted past the truncation depth.
  std::int64_t coefficient(int k) const;

  // Number of materialized coefficients; effectively unbounded with a periodic tail.
  int truncation_depth() const;
  bool has_periodic_tail() const { return !tail_.empty(); }
  bool approximate() const { return approximate_; }

  const std::vector<std::int64_t>& prefix() const { return prefix_; }
  const std::vector<std::int64_t>& periodic_tail() const { return tail_; }

  // Short human-readable tag, e.g. "golden", "[1,2;3]".
  std::string label() const;

  friend bool operator==(const RotationNumber&, const RotationNumber&) = default;

 private:
  std::vector<std::int64_t> prefix_;
  std::vector<std::int64_t> tail_;
  bool approximate_ = false;
};

void to_json(nlohmann::json& j, const RotationNumber& r);
void from_json(const nlohmann::json& j, RotationNumber& r);

// p_0..p_K and q_0..q_K.
struct ConvergentTable {
  std::vector<std::int64_t> p;
  std::vector<std::int64_t> q;

  int depth() const { return static_cast<int>(q.size()) - 1; }
};

// Value of the depth-K truncated continued fraction.
double real_value(const RotationNumber& r, int K);

// Throws OverflowError if q_K or p_K does not fit in 64 bits.
ConvergentTable convergents(const RotationNumber& r, int K);

// Deepest table that fits in 64-bit integers, capped at max_depth and the
// truncation depth.
ConvergentTable deepest_convergents(const RotationNumber& r, int max_depth = 200);

struct GrowthCertificate {
  double b_est = 0.0;  // max_{1<=k<=depth} (q_k + 1)^{1/k}
  int depth = 0;
  int attained_at = 0;
};

GrowthCertificate growth_certificate(const ConvergentTable& t);

// Product a_1 ... a_k.
double coefficient_product(const RotationNumber& r, int k);

}  // namespace qd
