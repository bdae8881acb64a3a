#include <doctest.h>

#include <random>

#include "quasidyn/error.hpp"
#include "quasidyn/words.hpp"

using namespace qd;

namespace {

PotentialWindow padded(const RotationNumber& r, const Phase& ph, int k, long lo, long hi) {
  long pad = partition_padding(r, k);
  return sample_potential(r, ph, std::min(lo, 1L) - pad, std::max(hi, 1L) + pad);
}

void check_blocks(const PotentialWindow& w, const KPartition& p, const RotationNumber& r) {
  REQUIRE_FALSE(p.blocks.empty());
  CHECK(p.blocks.front().start <= p.report_lo);
  CHECK(p.blocks.back().end >= p.report_hi);
  bool has_anchor = false;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    const auto& b = p.blocks[i];
    if (i > 0) {
      CHECK(b.start == p.blocks[i - 1].end + 1);
      CHECK(b.index == p.blocks[i - 1].index + 1);
    }
    auto expect = b.level == p.k ? standard_word(r, p.k) : previous_block_word(r, p.k);
    CHECK(w.word(b.start, b.end) == expect);
    if (b.start <= 1 && 1 <= b.end) {
      CHECK(b.index == 0);
      has_anchor = true;
    }
  }
  if (p.report_lo <= 1 && 1 <= p.report_hi) CHECK(has_anchor);
}

}  // namespace

TEST_CASE("golden 2-partition of [1,13]") {
  auto g = RotationNumber::golden();
  auto w = padded(g, Phase::zero(), 2, 1, 13);
  std::vector<std::pair<long, long>> want{{1, 2}, {3, 3}, {4, 5}, {6, 7}, {8, 8}, {9, 10}, {11, 11}, {12, 13}};
  std::vector<int> levels{2, 1, 2, 2, 1, 2, 1, 2};
  for (auto method : {PartitionMethod::kPinning, PartitionMethod::kTiling}) {
    auto p = k_partition(w, 2, 1, 13, method);
    REQUIRE(p.blocks.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(p.blocks[i].start == want[i].first);
      CHECK(p.blocks[i].end == want[i].second);
      CHECK(p.blocks[i].level == levels[i]);
      CHECK(p.blocks[i].index == static_cast<long>(i));
    }
  }
}

TEST_CASE("0-partition is the letter sequence") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    auto ph = Phase::generic(u(gen));
    for (const auto& r : {RotationNumber::golden(), RotationNumber::silver()}) {
      auto w = padded(r, ph, 0, -20, 20);
      auto p = k_partition(w, 0, -20, 20);
      REQUIRE(p.blocks.size() == 41);
      for (const auto& b : p.blocks) {
        CHECK(b.length() == 1);
        CHECK(b.level == (w.at(b.start) == 0 ? 0 : -1));
      }
    }
  }
}

TEST_CASE("pinning and tiling agree and the blocks spell s_k / s_{k-1}") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& r : {RotationNumber::golden(), RotationNumber::silver(), RotationNumber({2, 1, 3}, {1, 2})}) {
    for (int trial = 0; trial < 10; ++trial) {
      auto ph = Phase::generic(u(gen));
      for (int k = 1; k <= 6; ++k) {
        auto w = padded(r, ph, k, -60, 80);
        auto a = k_partition(w, k, -60, 80, PartitionMethod::kPinning);
        auto b = k_partition(w, k, -60, 80, PartitionMethod::kTiling);
        CHECK(a.blocks == b.blocks);
        check_blocks(w, a, r);
      }
    }
  }
}

TEST_CASE("every occurrence of b_k ends one site before an s_k block preceded by s_{k-1}") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& r : {RotationNumber::golden(), RotationNumber::silver()}) {
    for (int trial = 0; trial < 10; ++trial) {
      auto ph = Phase::generic(u(gen));
      for (int k = 1; k <= 6; ++k) {
        const long lo = -100, hi = 100;
        auto w = padded(r, ph, k, lo, hi);
        auto p = k_partition(w, k, lo, hi);
        long qk = static_cast<long>(standard_word(r, k).size());
        for (long m : find_occurrences(w, exceptional_word(r, k))) {
          if (m < lo || m + qk > hi) continue;
          // block starting at m + 1, labelled s_k, predecessor labelled s_{k-1}
          auto it = std::find_if(p.blocks.begin(), p.blocks.end(), [&](const PartitionBlock& b) { return b.start == m + 1; });
          REQUIRE(it != p.blocks.end());
          CHECK(it->level == k);
          CHECK(it->end == m + qk);
          REQUIRE(it != p.blocks.begin());
          CHECK(std::prev(it)->level == k - 1);
        }
      }
    }
  }
}

TEST_CASE("insufficient padding is refused") {
  auto g = RotationNumber::golden();
  auto w = sample_potential(g, Phase::zero(), -3, 20);
  CHECK_THROWS_AS(k_partition(w, 4, 1, 13), WindowError);
}

TEST_CASE("partition json") {
  auto g = RotationNumber::golden();
  auto w = padded(g, Phase::zero(), 2, 1, 5);
  nlohmann::json j = k_partition(w, 2, 1, 5);
  REQUIRE(j.is_array());
  CHECK(j[0]["start"] == 1);
  CHECK(j[0]["end"] == 2);
  CHECK(j[0]["label"] == "s_2");
  CHECK(j[1]["label"] == "s_1");
}
