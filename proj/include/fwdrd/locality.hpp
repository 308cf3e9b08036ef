#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "fwdrd/common.hpp"
#include "fwdrd/trace_io.hpp"

namespace fwdrd {

/// Per-access reuse distances; `kInfinite` where no reference exists.
using RdSeries = std::vector<Distance>;

inline constexpr std::size_t kDefaultAvgWindow = 100;
inline constexpr std::size_t kDefaultFreqWindow = 50;

/// rd[t] = t - (previous time block[t] was accessed), or kInfinite.
RdSeries backward_rd(const Trace& trace);

/// frd[t] = (next time block[t] is accessed) - t, or kInfinite.
RdSeries forward_rd(const Trace& trace);

/// delta[0] = 0, delta[t] = block[t] - block[t-1] (two's complement).
std::vector<std::int64_t> address_deltas(const Trace& trace);

/// prd[t] = rd recorded at the previous access of block[t].
RdSeries penultimate_rd(const Trace& trace, const RdSeries& rd);

/// Mean of the finite rd values of block[t] among the last k accesses
/// (the current one included). 0 when there are none.
std::vector<double> window_avg_rd(const Trace& trace, const RdSeries& rd, std::size_t k);

/// Occurrences of block[t] among the last k accesses, the current one included.
std::vector<std::uint32_t> window_freq(const Trace& trace, std::size_t k);

/// Writes `time,rd` CSV with infinite distances written as 0. Returns the data row count.
std::size_t export_rd_timeseries(const Trace& trace, std::ostream& out);

/// The five trace-derived locality features of one access.
struct LocalityFeatures {
  std::int64_t addr_delta = 0;
  Distance rd = kInfinite;
  Distance penult_rd = kInfinite;
  double win_avg_rd = 0.0;
  std::uint32_t win_freq = 1;
  bool operator==(const LocalityFeatures&) const = default;
};

/// Streaming feature extractor. Each step() costs O(1) amortized; memory is
/// O(unique blocks + window lengths). Single consumer.
class LocalityTracker {
 public:
  explicit LocalityTracker(std::size_t k_avg = kDefaultAvgWindow,
                           std::size_t k_freq = kDefaultFreqWindow);

  LocalityFeatures step(BlockId block);

  std::size_t time() const noexcept { return time_; }
  std::size_t k_avg() const noexcept { return k_avg_; }
  std::size_t k_freq() const noexcept { return k_freq_; }

 private:
  struct History {
    std::size_t last_time = 0;
    Distance last_rd = kInfinite;
  };
  struct AvgCounter {
    std::uint64_t sum = 0;
    std::uint32_t finite = 0;
    std::uint32_t present = 0;
  };
  struct AvgEntry {
    BlockId block;
    Distance rd;
  };

  std::size_t k_avg_;
  std::size_t k_freq_;
  std::size_t time_ = 0;
  BlockId prev_block_ = 0;
  std::unordered_map<BlockId, History> history_;
  std::deque<AvgEntry> avg_window_;
  std::unordered_map<BlockId, AvgCounter> avg_counts_;
  std::deque<BlockId> freq_window_;
  std::unordered_map<BlockId, std::uint32_t> freq_counts_;
};

}  // namespace fwdrd
