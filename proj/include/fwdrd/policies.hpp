#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <list>
#include <map>
#include <set>
#include <tuple>
#include <string>
#include <unordered_map>
#include <vector>

#include "fwdrd/dataset.hpp"
#include "fwdrd/predictor.hpp"
#include "fwdrd/trace_io.hpp"

namespace fwdrd {

enum class PolicyKind { kLru, kLfu, kTwoQ, kArc, kOpt, kPopt };

std::string policy_name(PolicyKind kind);
/// Accepts lru, lfu, 2q, arc, opt, popt (case-insensitive).
PolicyKind parse_policy(const std::string& name);

struct SimResult {
  std::string policy;
  std::size_t cache_size = 0;
  std::size_t accesses = 0;
  std::size_t misses = 0;
  double miss_ratio = 0.0;
  bool operator==(const SimResult&) const = default;
};

// Online caches. access() returns true on a hit. Capacities are in blocks.

class LruCache {
 public:
  explicit LruCache(std::size_t capacity);
  bool access(BlockId block);
  std::size_t size() const noexcept { return map_.size(); }

 private:
  std::size_t capacity_;
  std::list<BlockId> order_;  // front = most recent
  std::unordered_map<BlockId, std::list<BlockId>::iterator> map_;
};

/// Evicts the lowest-frequency resident block, ties to the least recently
/// used. Counts are forgotten on eviction.
class LfuCache {
 public:
  explicit LfuCache(std::size_t capacity);
  bool access(BlockId block);
  std::size_t size() const noexcept { return map_.size(); }

 private:
  struct Entry {
    std::uint64_t freq;
    std::uint64_t last_use;
  };
  std::size_t capacity_;
  std::uint64_t clock_ = 0;
  std::unordered_map<BlockId, Entry> map_;
  std::set<std::tuple<std::uint64_t, std::uint64_t, BlockId>> order_;
};

/// Full 2Q: A1in FIFO (Kin), A1out ghost FIFO (Kout), Am LRU.
class TwoQCache {
 public:
  static constexpr std::size_t kMinCapacity = 4;
  TwoQCache(std::size_t capacity, double kin_frac = 0.25, double kout_frac = 0.5);
  bool access(BlockId block);
  std::size_t size() const noexcept { return a1in_.size() + am_.size(); }
  std::size_t a1in_size() const noexcept { return a1in_.size(); }
  std::size_t a1out_size() const noexcept { return a1out_.size(); }
  std::size_t am_size() const noexcept { return am_.size(); }
  std::size_t kin() const noexcept { return kin_; }
  std::size_t kout() const noexcept { return kout_; }

 private:
  enum class Where { kA1in, kA1out, kAm };
  struct Slot {
    Where where;
    std::list<BlockId>::iterator it;
  };
  void reclaim();

  std::size_t capacity_, kin_, kout_;
  std::list<BlockId> a1in_, a1out_, am_;  // front = newest / most recent
  std::unordered_map<BlockId, Slot> map_;
};

/// Adaptive Replacement Cache (Megiddo & Modha).
class ArcCache {
 public:
  explicit ArcCache(std::size_t capacity);
  bool access(BlockId block);
  std::size_t size() const noexcept { return t1_.size() + t2_.size(); }
  std::size_t t1_size() const noexcept { return t1_.size(); }
  std::size_t t2_size() const noexcept { return t2_.size(); }
  std::size_t b1_size() const noexcept { return b1_.size(); }
  std::size_t b2_size() const noexcept { return b2_.size(); }
  double target() const noexcept { return p_; }

 private:
  enum class Where { kT1, kT2, kB1, kB2 };
  struct Slot {
    Where where;
    std::list<BlockId>::iterator it;
  };
  std::list<BlockId>& list(Where w);
  void move_to_front(BlockId block, Where to);
  void remove_lru(Where from);
  void replace(bool in_b2);

  std::size_t capacity_;
  double p_ = 0.0;
  std::list<BlockId> t1_, t2_, b1_, b2_;  // front = MRU
  std::unordered_map<BlockId, Slot> map_;
};

/// Evicts the resident block with the largest stored next-access time,
/// ties to the lowest block id. Shared by OPT (true next use) and pOPT
/// (predicted next use).
class FarthestNextUseCache {
 public:
  explicit FarthestNextUseCache(std::size_t capacity);
  /// Accesses `block` and stores `next_time` as its next access time.
  bool access(BlockId block, std::uint64_t next_time);
  std::size_t size() const noexcept { return next_.size(); }

 private:
  struct Farthest {
    bool operator()(const std::pair<std::uint64_t, BlockId>& a,
                    const std::pair<std::uint64_t, BlockId>& b) const {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    }
  };
  std::size_t capacity_;
  std::unordered_map<BlockId, std::uint64_t> next_;
  std::set<std::pair<std::uint64_t, BlockId>, Farthest> order_;
};

SimResult simulate_lru(const Trace& trace, std::size_t capacity);
SimResult simulate_lfu(const Trace& trace, std::size_t capacity);
SimResult simulate_2q(const Trace& trace, std::size_t capacity, double kin_frac = 0.25,
                      double kout_frac = 0.5);
SimResult simulate_arc(const Trace& trace, std::size_t capacity);
SimResult simulate_opt(const Trace& trace, std::size_t capacity);

/// Prediction-driven OPT. For every access the online sample is rebuilt
/// (zero-padded while fewer than sequence_length accesses exist), the
/// predictor supplies a forward reuse distance and the block's stored next
/// access time becomes i + distance, or i + n + 1 when infinite.
SimResult simulate_popt(const Trace& trace, std::size_t capacity, Predictor& predictor,
                        const SampleEncoding& encoding = {});

/// Exact minimum miss count over all demand-fetch eviction choices, by
/// memoized search. Exponential: requires n <= 30 and capacity <= 3 unless
/// capacity covers every distinct block.
std::size_t brute_force_min_misses(const Trace& trace, std::size_t capacity);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kLru;
  /// Required for kPopt.
  Predictor* predictor = nullptr;
  SampleEncoding encoding;
  /// Overrides the policy name in results when non-empty.
  std::string label;
};

struct Mrc {
  std::string policy;
  std::vector<std::size_t> sizes;
  std::vector<double> ratios;
  std::vector<SimResult> results;
};

SimResult simulate(const Trace& trace, const PolicySpec& spec, std::size_t capacity);

/// One simulation per size. Sizes must be strictly ascending. LRU and OPT
/// curves are checked to be non-increasing.
Mrc mrc(const Trace& trace, const PolicySpec& spec, const std::vector<std::size_t>& sizes);

void write_results_csv(const std::vector<SimResult>& results, std::ostream& out);
std::vector<SimResult> read_results_csv(std::istream& in);

}  // namespace fwdrd

namespace fwdrd {

struct CompareRow {
  std::string policy;
  std::size_t sizes = 0;
  double mean_miss_ratio = 0.0;
  double mean_delta_vs_opt = 0.0;  ///< mean over sizes of ratio(policy) - ratio(OPT)
  double mean_delta_vs_lru = 0.0;  ///< mean over sizes of ratio(policy) - ratio(LRU)
  bool operator==(const CompareRow&) const = default;
};

/// Per-policy averages over the shared cache sizes. Every size must have an
/// OPT and an LRU row. Policies keep their first-seen order.
std::vector<CompareRow> compare_results(const std::vector<SimResult>& results);
void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out);

}  // namespace fwdrd
