#include <algorithm>
#include <map>

#include "quasidyn/error.hpp"
#include "quasidyn/words.hpp"

namespace qd {

namespace {

std::int64_t q_at(const RotationNumber& r, int k) {
  if (k <= 0) return 1;
  return convergents(r, k).q[k];
}

struct BlockWords {
  std::string current;   // s_k
  std::string previous;  // s_{k-1}
};

BlockWords block_words(const RotationNumber& r, int k) {
  return {standard_word(r, k).str(), previous_block_word(r, k).str()};
}

// Index the blocks so that site 1 falls in block 0 and keep those meeting the range.
KPartition finish(int k, long report_lo, long report_hi, std::vector<PartitionBlock> blocks) {
  auto anchor = std::find_if(blocks.begin(), blocks.end(), [](const PartitionBlock& b) { return b.start <= 1 && 1 <= b.end; });
  if (anchor == blocks.end()) throw ParseFailure("parsed region does not contain site 1");
  long j0 = anchor - blocks.begin();
  KPartition out;
  out.k = k;
  out.report_lo = report_lo;
  out.report_hi = report_hi;
  for (long i = 0; i < static_cast<long>(blocks.size()); ++i) {
    auto b = blocks[static_cast<std::size_t>(i)];
    b.index = i - j0;
    if (b.end >= report_lo && b.start <= report_hi) out.blocks.push_back(b);
  }
  if (out.blocks.empty() || out.blocks.front().start > report_lo || out.blocks.back().end < report_hi)
    throw ParseFailure("partition does not cover the reporting range");
  return out;
}

// Every tiling of the window by {s_k, s_{k-1}} (ragged ends allowed) is a path in a
// DAG over cut positions. Cuts inside the target range must lie on every path.
std::vector<PartitionBlock> parse_by_tiling(const PotentialWindow& w, int k, long target_lo, long target_hi) {
  auto words = block_words(w.rotation(), k);
  const std::string text = w.word(w.lo(), w.hi()).str();
  const long W = static_cast<long>(text.size());
  const long Q = static_cast<long>(words.current.size());
  const long P = static_cast<long>(words.previous.size());

  std::vector<char> match_cur(static_cast<std::size_t>(W + 1), 0), match_prev(static_cast<std::size_t>(W + 1), 0);
  for (auto i : kmp_search(text, words.current)) match_cur[i] = 1;
  for (auto i : kmp_search(text, words.previous)) match_prev[i] = 1;

  auto is_suffix_of = [&](const std::string& block, long len) {
    return len < static_cast<long>(block.size()) && text.compare(0, static_cast<std::size_t>(len), block,
                                                                 block.size() - static_cast<std::size_t>(len),
                                                                 static_cast<std::size_t>(len)) == 0;
  };
  auto is_prefix_of = [&](const std::string& block, long from) {
    long len = W - from;
    return len < static_cast<long>(block.size()) &&
           text.compare(static_cast<std::size_t>(from), static_cast<std::size_t>(len), block, 0,
                        static_cast<std::size_t>(len)) == 0;
  };

  std::vector<double> fwd(static_cast<std::size_t>(W + 1), 0.0), bwd(static_cast<std::size_t>(W + 1), 0.0);
  const long edge = std::max(Q, P);
  for (long i = 0; i < std::min(edge, W + 1); ++i)
    if (i == 0 || is_suffix_of(words.current, i) || is_suffix_of(words.previous, i)) fwd[i] = 1.0;
  for (long i = 0; i <= W; ++i) {
    if (fwd[i] == 0.0) continue;
    if (match_cur[i] && i + Q <= W) fwd[i + Q] += fwd[i];
    if (match_prev[i] && i + P <= W) fwd[i + P] += fwd[i];
  }
  for (long i = W; i >= 0; --i) {
    if (W - i < edge && (i == W || is_prefix_of(words.current, i) || is_prefix_of(words.previous, i))) bwd[i] = 1.0;
    if (i < W) {
      if (match_cur[i] && i + Q <= W) bwd[i] += bwd[i + Q];
      if (match_prev[i] && i + P <= W) bwd[i] += bwd[i + P];
    }
  }
  double total = 0.0;
  for (long i = 0; i <= W; ++i)
    if (W - i < edge && (i == W || is_prefix_of(words.current, i) || is_prefix_of(words.previous, i)))
      total += fwd[i];
  if (total == 0.0) throw ParseFailure("window admits no tiling by s_k and s_{k-1}");

  auto forced = [&](long i) { return fwd[i] * bwd[i] == total; };
  auto live = [&](long i) { return fwd[i] * bwd[i] > 0.0; };

  // Cut index i sits before site lo + i.
  const long first_cut = target_lo - w.lo() - edge;
  const long last_cut = target_hi - w.lo() + 1 + edge;
  if (first_cut < 0 || last_cut > W) throw WindowError("window too small for the partition target range");
  for (long i = first_cut; i <= last_cut; ++i)
    if (live(i) && !forced(i))
      throw ParseFailure("k-partition not unique near site " + std::to_string(w.lo() + i) + " (padding too small?)");

  long start = -1;
  for (long i = first_cut; i <= first_cut + edge; ++i)
    if (forced(i)) {
      start = i;
      break;
    }
  if (start < 0) throw ParseFailure("no forced cut before the target range");

  std::vector<PartitionBlock> blocks;
  long i = start;
  while (w.lo() + i <= target_hi) {
    bool via_cur = match_cur[i] && i + Q <= W && live(i + Q);
    bool via_prev = match_prev[i] && i + P <= W && live(i + P);
    if (via_cur == via_prev) throw ParseFailure("ambiguous or broken tiling at site " + std::to_string(w.lo() + i));
    long len = via_cur ? Q : P;
    blocks.push_back({w.lo() + i, w.lo() + i + len - 1, via_cur ? k : k - 1, 0});
    i += len;
  }
  return blocks;
}

// Occurrences of b_k pin an s_{k-1} | s_k boundary; everything between pins is s_k.
std::vector<PartitionBlock> parse_by_pinning(const PotentialWindow& w, int k, long target_lo, long target_hi) {
  auto words = block_words(w.rotation(), k);
  const long Q = static_cast<long>(words.current.size());
  const long P = static_cast<long>(words.previous.size());
  auto pins = find_occurrences(w, exceptional_word(w.rotation(), k));
  // Keep pins whose s_{k-1} and s_k blocks both fit.
  std::vector<long> usable;
  for (long m : pins)
    if (m + 1 - P >= w.lo() && m + Q <= w.hi()) usable.push_back(m);
  if (usable.empty()) return parse_by_tiling(w, k, target_lo, target_hi);

  auto check = [&](long start, const std::string& word) {
    if (w.word(start, start + static_cast<long>(word.size()) - 1).str() != word)
      throw ParseFailure("block at site " + std::to_string(start) + " does not match its label");
  };

  std::vector<PartitionBlock> blocks;
  // Backward fill before the first pin until the target range (and site 1) is covered.
  {
    long cursor = usable.front() + 1 - P;
    std::vector<PartitionBlock> head;
    while (cursor > target_lo && cursor - Q >= w.lo()) {
      check(cursor - Q, words.current);
      head.push_back({cursor - Q, cursor - 1, k, 0});
      cursor -= Q;
    }
    if (cursor > target_lo) throw WindowError("window too small to cover the partition target range");
    blocks.assign(head.rbegin(), head.rend());
  }
  for (std::size_t i = 0; i < usable.size(); ++i) {
    long m = usable[i];
    check(m + 1 - P, words.previous);
    check(m + 1, words.current);
    if (!blocks.empty() && blocks.back().end != m - P)
      throw ParseFailure("pinned s_{k-1} block at site " + std::to_string(m + 1 - P) + " overlaps or leaves a gap");
    blocks.push_back({m + 1 - P, m, k - 1, 0});
    blocks.push_back({m + 1, m + Q, k, 0});
    long cursor = m + Q + 1;
    if (i + 1 < usable.size()) {
      const long stop = usable[i + 1] + 1 - P;
      if (stop < cursor || (stop - cursor) % Q != 0)
        throw ParseFailure("gap between pins at sites " + std::to_string(m) + " and " + std::to_string(usable[i + 1]) +
                           " is not a multiple of q_k");
      for (; cursor < stop; cursor += Q) {
        check(cursor, words.current);
        blocks.push_back({cursor, cursor + Q - 1, k, 0});
      }
    } else {
      for (; cursor <= target_hi; cursor += Q) {
        if (cursor + Q - 1 > w.hi()) throw WindowError("window too small to cover the partition target range");
        check(cursor, words.current);
        blocks.push_back({cursor, cursor + Q - 1, k, 0});
      }
    }
  }
  return blocks;
}

std::vector<PartitionBlock> parse_letters(const PotentialWindow& w, long target_lo, long target_hi) {
  std::vector<PartitionBlock> blocks;
  for (long n = target_lo; n <= target_hi; ++n) blocks.push_back({n, n, w.at(n) ? -1 : 0, 0});
  return blocks;
}

}  // namespace

long partition_padding(const RotationNumber& r, int k) { return static_cast<long>(q_at(r, k + 2)); }

KPartition k_partition(const PotentialWindow& window, int k, long report_lo, long report_hi, PartitionMethod method) {
  if (k < 0) throw PreconditionError("partition level must be >= 0");
  if (report_hi < report_lo) throw PreconditionError("empty reporting range");
  const long target_lo = std::min(report_lo, 1L);
  const long target_hi = std::max(report_hi, 1L);
  const long pad = partition_padding(window.rotation(), k);
  if (window.lo() > target_lo - pad || window.hi() < target_hi + pad)
    throw WindowError("partition needs the window padded by q_{k+2} = " + std::to_string(pad) +
                      " around [" + std::to_string(target_lo) + ", " + std::to_string(target_hi) + "]");
  std::vector<PartitionBlock> blocks;
  if (k == 0) {
    blocks = parse_letters(window, target_lo, target_hi);
  } else if (method == PartitionMethod::kPinning) {
    blocks = parse_by_pinning(window, k, target_lo, target_hi);
  } else {
    blocks = parse_by_tiling(window, k, target_lo, target_hi);
  }
  return finish(k, report_lo, report_hi, std::move(blocks));
}

void to_json(nlohmann::json& j, const KPartition& p) {
  j = nlohmann::json::array();
  for (const auto& b : p.blocks)
    j.push_back({{"start", b.start}, {"end", b.end}, {"label", "s_" + std::to_string(b.level)}, {"index", b.index}});
}

}  // namespace qd
