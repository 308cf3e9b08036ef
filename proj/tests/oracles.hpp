#pragma once

// Independent brute-force references used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fwdrd/common.hpp"
#include "fwdrd/random.hpp"
#include "fwdrd/trace_io.hpp"

namespace fwdrd::oracle {

inline Trace worked_trace() {
  // a a a b a b a b c a
  return Trace({0, 0, 0, 1, 0, 1, 0, 1, 2, 0});
}

inline Trace random_trace(Rng& rng, std::size_t n, std::size_t alphabet) {
  std::vector<BlockId> blocks(n);
  for (auto& b : blocks) b = rng.next() % alphabet;
  return Trace(std::move(blocks));
}

inline std::vector<Distance> backward_rd(const Trace& t) {
  std::vector<Distance> out(t.size(), kInfinite);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i; j-- > 0;)
      if (t[j] == t[i]) {
        out[i] = i - j;
        break;
      }
  return out;
}

inline std::vector<Distance> forward_rd(const Trace& t) {
  std::vector<Distance> out(t.size(), kInfinite);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (t[j] == t[i]) {
        out[i] = j - i;
        break;
      }
  return out;
}

/// Replays each block's access history: the rd at the previous access.
inline std::vector<Distance> penultimate_rd(const Trace& t) {
  const auto rd = oracle::backward_rd(t);
  std::vector<Distance> out(t.size(), kInfinite);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (rd[i] != kInfinite) out[i] = rd[i - rd[i]];
  return out;
}

inline std::vector<double> window_avg_rd(const Trace& t, std::size_t k) {
  const auto rd = oracle::backward_rd(t);
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint64_t sum = 0, cnt = 0;
    const std::size_t lo = i + 1 >= k ? i + 1 - k : 0;
    for (std::size_t j = lo; j <= i; ++j)
      if (t[j] == t[i] && rd[j] != kInfinite) {
        sum += rd[j];
        ++cnt;
      }
    if (cnt) out[i] = static_cast<double>(sum) / static_cast<double>(cnt);
  }
  return out;
}

inline std::vector<std::uint32_t> window_freq(const Trace& t, std::size_t k) {
  std::vector<std::uint32_t> out(t.size(), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t lo = i + 1 >= k ? i + 1 - k : 0;
    for (std::size_t j = lo; j <= i; ++j) out[i] += t[j] == t[i];
  }
  return out;
}

/// LRU over a plain vector, most recent at the back.
inline std::size_t lru_misses(const Trace& t, std::size_t c) {
  std::vector<BlockId> stack;
  std::size_t misses = 0;
  for (BlockId b : t.blocks()) {
    auto it = std::find(stack.begin(), stack.end(), b);
    if (it != stack.end()) {
      stack.erase(it);
    } else {
      ++misses;
      if (stack.size() == c) stack.erase(stack.begin());
    }
    stack.push_back(b);
  }
  return misses;
}

/// LFU by linear scan: min frequency, then least recent use.
inline std::size_t lfu_misses(const Trace& t, std::size_t c) {
  struct E {
    BlockId b;
    std::size_t freq, last;
  };
  std::vector<E> cache;
  std::size_t misses = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto it = std::find_if(cache.begin(), cache.end(), [&](const E& e) { return e.b == t[i]; });
    if (it != cache.end()) {
      ++it->freq;
      it->last = i;
      continue;
    }
    ++misses;
    if (cache.size() == c) {
      auto victim = std::min_element(cache.begin(), cache.end(), [](const E& x, const E& y) {
        return x.freq != y.freq ? x.freq < y.freq : x.last < y.last;
      });
      cache.erase(victim);
    }
    cache.push_back({t[i], 1, i});
  }
  return misses;
}

/// Exhaustive 1-D two-cluster split of sorted values minimizing within-cluster SSE.
inline std::pair<double, double> best_two_partition(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> centers{0, 0};
  for (std::size_t cut = 1; cut < v.size(); ++cut) {
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < cut; ++i) m1 += v[i];
    for (std::size_t i = cut; i < v.size(); ++i) m2 += v[i];
    m1 /= static_cast<double>(cut);
    m2 /= static_cast<double>(v.size() - cut);
    double sse = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - (i < cut ? m1 : m2);
      sse += d * d;
    }
    if (sse < best) {
      best = sse;
      centers = {m1, m2};
    }
  }
  return centers;
}

}  // namespace fwdrd::oracle
