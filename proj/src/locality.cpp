#include "fwdrd/locality.hpp"

#include <ostream>

namespace fwdrd {

RdSeries backward_rd(const Trace& trace) {
  RdSeries rd(trace.size(), kInfinite);
  std::unordered_map<BlockId, std::size_t> last;
  last.reserve(trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    auto [it, inserted] = last.try_emplace(trace[t], t);
    if (!inserted) {
      rd[t] = t - it->second;
      it->second = t;
    }
  }
  return rd;
}

RdSeries forward_rd(const Trace& trace) {
  RdSeries frd(trace.size(), kInfinite);
  std::unordered_map<BlockId, std::size_t> next;
  next.reserve(trace.size());
  for (std::size_t t = trace.size(); t-- > 0;) {
    auto [it, inserted] = next.try_emplace(trace[t], t);
    if (!inserted) {
      frd[t] = it->second - t;
      it->second = t;
    }
  }
  return frd;
}

std::vector<std::int64_t> address_deltas(const Trace& trace) {
  std::vector<std::int64_t> deltas(trace.size(), 0);
  for (std::size_t t = 1; t < trace.size(); ++t)
    deltas[t] = static_cast<std::int64_t>(trace[t] - trace[t - 1]);
  return deltas;
}

RdSeries penultimate_rd(const Trace& trace, const RdSeries& rd) {
  if (rd.size() != trace.size()) throw Error("penultimate_rd: rd series length mismatch");
  RdSeries prd(trace.size(), kInfinite);
  std::unordered_map<BlockId, Distance> last_rd;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    auto [it, inserted] = last_rd.try_emplace(trace[t], rd[t]);
    if (!inserted) {
      prd[t] = it->second;
      it->second = rd[t];
    }
  }
  return prd;
}

std::vector<double> window_avg_rd(const Trace& trace, const RdSeries& rd, std::size_t k) {
  if (k == 0) throw Error("window length must be >= 1");
  if (rd.size() != trace.size()) throw Error("window_avg_rd: rd series length mismatch");
  struct Counter {
    std::uint64_t sum = 0;
    std::uint64_t finite = 0;
  };
  std::unordered_map<BlockId, Counter> counts;
  std::vector<double> avg(trace.size(), 0.0);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (is_finite(rd[t])) {
      auto& c = counts[trace[t]];
      c.sum += rd[t];
      ++c.finite;
    }
    if (t >= k && is_finite(rd[t - k])) {
      auto it = counts.find(trace[t - k]);
      it->second.sum -= rd[t - k];
      if (--it->second.finite == 0) counts.erase(it);
    }
    auto it = counts.find(trace[t]);
    if (it != counts.end())
      avg[t] = static_cast<double>(it->second.sum) / static_cast<double>(it->second.finite);
  }
  return avg;
}

std::vector<std::uint32_t> window_freq(const Trace& trace, std::size_t k) {
  if (k == 0) throw Error("window length must be >= 1");
  std::unordered_map<BlockId, std::uint32_t> counts;
  std::vector<std::uint32_t> freq(trace.size(), 0);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    ++counts[trace[t]];
    if (t >= k) {
      auto it = counts.find(trace[t - k]);
      if (--it->second == 0) counts.erase(it);
    }
    freq[t] = counts[trace[t]];
  }
  return freq;
}

std::size_t export_rd_timeseries(const Trace& trace, std::ostream& out) {
  const RdSeries rd = backward_rd(trace);
  out << "time,rd\n";
  for (std::size_t t = 0; t < rd.size(); ++t) out << t << ',' << (is_finite(rd[t]) ? rd[t] : 0) << '\n';
  if (!out) throw Error("failed writing reuse-distance time series");
  return rd.size();
}

LocalityTracker::LocalityTracker(std::size_t k_avg, std::size_t k_freq)
    : k_avg_(k_avg), k_freq_(k_freq) {
  if (k_avg == 0 || k_freq == 0) throw Error("window length must be >= 1");
}

LocalityFeatures LocalityTracker::step(BlockId block) {
  LocalityFeatures f;
  f.addr_delta = time_ == 0 ? 0 : static_cast<std::int64_t>(block - prev_block_);
  prev_block_ = block;

  auto [hist, first] = history_.try_emplace(block);
  if (!first) {
    f.rd = time_ - hist->second.last_time;
    f.penult_rd = hist->second.last_rd;
  }
  hist->second.last_time = time_;
  hist->second.last_rd = f.rd;

  // Average window: entries carry their rd so the departing side can be undone.
  avg_window_.push_back({block, f.rd});
  {
    auto& c = avg_counts_[block];
    ++c.present;
    if (is_finite(f.rd)) {
      c.sum += f.rd;
      ++c.finite;
    }
  }
  if (avg_window_.size() > k_avg_) {
    const AvgEntry old = avg_window_.front();
    avg_window_.pop_front();
    auto it = avg_counts_.find(old.block);
    if (is_finite(old.rd)) {
      it->second.sum -= old.rd;
      --it->second.finite;
    }
    if (--it->second.present == 0) avg_counts_.erase(it);
  }
  {
    const auto& c = avg_counts_.at(block);
    f.win_avg_rd = c.finite ? static_cast<double>(c.sum) / static_cast<double>(c.finite) : 0.0;
  }

  freq_window_.push_back(block);
  ++freq_counts_[block];
  if (freq_window_.size() > k_freq_) {
    auto it = freq_counts_.find(freq_window_.front());
    freq_window_.pop_front();
    if (--it->second == 0) freq_counts_.erase(it);
  }
  f.win_freq = freq_counts_.at(block);

  ++time_;
  return f;
}

}  // namespace fwdrd
