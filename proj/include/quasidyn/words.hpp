#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "quasidyn/rotations.hpp"

namespace qd {

// Finite word over {0,1}. Serializes as an ASCII string of '0'/'1'.
class BinaryWord {
 public:
  BinaryWord() = default;
  explicit BinaryWord(std::string bits);  // throws PreconditionError on other characters
  static BinaryWord from_symbols(const std::vector<std::uint8_t>& symbols);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i] - '0'; }
  const std::string& str() const { return bits_; }

  BinaryWord operator+(const BinaryWord& other) const { return BinaryWord(bits_ + other.bits_, 0); }
  BinaryWord substr(std::size_t pos, std::size_t len) const { return BinaryWord(bits_.substr(pos, len), 0); }
  BinaryWord reversed() const;
  BinaryWord rotated(std::size_t shift) const;  // cyclic left rotation
  std::size_t count_ones() const;
  bool is_palindrome() const;

  friend auto operator<=>(const BinaryWord&, const BinaryWord&) = default;

 private:
  BinaryWord(std::string bits, int) : bits_(std::move(bits)) {}
  std::string bits_;
};

std::ostream& operator<<(std::ostream& os, const BinaryWord& w);

// Phase theta in [0,1). Phases on the orbit of 0, theta = {j alpha}, are kept
// symbolic so that v_{alpha,theta}(n) = v_{alpha,0}(n + j) is decided exactly;
// this covers theta = 0 and the exceptional phase theta = 1 - alpha (j = -1).
class Phase {
 public:
  static Phase generic(double theta);  // throws PreconditionError unless 0 <= theta < 1
  static Phase orbit(long shift);
  static Phase zero() { return orbit(0); }
  static Phase exceptional() { return orbit(-1); }

  bool on_orbit() const { return shift_.has_value(); }
  long orbit_shift() const { return *shift_; }
  double value(const RotationNumber& r) const;  // numeric theta
  std::string label() const;

  friend bool operator==(const Phase&, const Phase&) = default;

 private:
  Phase() = default;
  double theta_ = 0.0;
  std::optional<long> shift_;
};

// v_{alpha,theta}(n) for n in [lo, hi].
class PotentialWindow {
 public:
  PotentialWindow(RotationNumber r, Phase phase, long lo, std::vector<std::uint8_t> values);

  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(values_.size()) - 1; }
  long size() const { return static_cast<long>(values_.size()); }
  bool contains(long n) const { return n >= lo() && n <= hi(); }
  int at(long n) const;  // throws WindowError outside [lo, hi]
  const std::vector<std::uint8_t>& values() const { return values_; }
  const RotationNumber& rotation() const { return rotation_; }
  const Phase& phase() const { return phase_; }

  BinaryWord word(long from, long to) const;  // symbols at sites from..to inclusive

 private:
  RotationNumber rotation_;
  Phase phase_;
  long lo_;
  std::vector<std::uint8_t> values_;
};

PotentialWindow sample_potential(const RotationNumber& r, const Phase& phase, long lo, long hi);
// theta == 0 is routed to the exact orbit path.
PotentialWindow sample_potential(const RotationNumber& r, double theta, long lo, long hi);

// s_k for k >= 0 (s_0 = 0, s_1 = 0^{a_1-1} 1, s_k = s_{k-1}^{a_k} s_{k-2}).
BinaryWord standard_word(const RotationNumber& r, int k);

// Word labelling the shorter partition block at level k: s_{k-1}, with s_{-1} := "1".
BinaryWord previous_block_word(const RotationNumber& r, int k);

// Set of length-n factors. Requires window length >= 2(n + q_m) with q_m >= n.
std::set<BinaryWord> factors(const PotentialWindow& window, int n);

BinaryWord right_special(const PotentialWindow& window, int n);

bool palindrome_prefix_check(const RotationNumber& r, int k);

// b_k: complement of the last symbol of s_k followed by the first q_k - 1 symbols.
BinaryWord exceptional_word(const RotationNumber& r, int k);

bool is_conjugate(const BinaryWord& u, const BinaryWord& v);

// Start offsets of pattern in text (Knuth-Morris-Pratt).
std::vector<std::size_t> kmp_search(const std::string& text, const std::string& pattern);

struct PhaseWords {
  BinaryWord right;  // s_k^theta = v(1) ... v(q_k)
  BinaryWord left;   // t_k^theta = v(-q_k+1) ... v(0)
};

PhaseWords phase_words(const RotationNumber& r, const Phase& phase, int k);

// All start sites m with v(m .. m+|pattern|-1) = pattern.
std::vector<long> find_occurrences(const PotentialWindow& window, const BinaryWord& pattern);

// ---- k-partitions ----

struct PartitionBlock {
  long start = 0;
  long end = 0;       // inclusive
  int level = 0;      // k for an s_k block, k-1 for an s_{k-1} block
  long index = 0;     // j, with site 1 in block 0

  long length() const { return end - start + 1; }
  friend bool operator==(const PartitionBlock&, const PartitionBlock&) = default;
};

struct KPartition {
  int k = 0;
  long report_lo = 0;
  long report_hi = 0;
  std::vector<PartitionBlock> blocks;  // consecutive, covering [report_lo, report_hi]
};

void to_json(nlohmann::json& j, const KPartition& p);

enum class PartitionMethod {
  kPinning,  // anchor on occurrences of b_k (falls back to tiling if none occur)
  kTiling,   // enumerate all tilings by {s_k, s_{k-1}} and keep the forced one
};

// Partition restricted to [report_lo, report_hi]. The window must extend at
// least q_{k+2} beyond the range on both sides and contain site 1.
KPartition k_partition(const PotentialWindow& window, int k, long report_lo, long report_hi,
                       PartitionMethod method = PartitionMethod::kPinning);

// Padding the partition routines require on each side of a reporting range.
long partition_padding(const RotationNumber& r, int k);

}  // namespace qd
