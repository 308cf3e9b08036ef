#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fwdrd/locality.hpp"
#include "fwdrd/policies.hpp"

namespace fwdrd {

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kLru: return "LRU";
    case PolicyKind::kLfu: return "LFU";
    case PolicyKind::kTwoQ: return "2Q";
    case PolicyKind::kArc: return "ARC";
    case PolicyKind::kOpt: return "OPT";
    case PolicyKind::kPopt: return "pOPT";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (n == "lru") return PolicyKind::kLru;
  if (n == "lfu") return PolicyKind::kLfu;
  if (n == "2q") return PolicyKind::kTwoQ;
  if (n == "arc") return PolicyKind::kArc;
  if (n == "opt") return PolicyKind::kOpt;
  if (n == "popt") return PolicyKind::kPopt;
  throw Error("unknown policy: " + name);
}

namespace {

SimResult make_result(std::string policy, std::size_t capacity, std::size_t accesses, std::size_t misses) {
  return {std::move(policy), capacity, accesses, misses,
          accesses ? static_cast<double>(misses) / static_cast<double>(accesses) : 0.0};
}

template <typename Cache>
SimResult run(const Trace& trace, std::size_t capacity, std::string name, Cache cache) {
  std::size_t misses = 0;
  for (BlockId b : trace.blocks()) misses += !cache.access(b);
  return make_result(std::move(name), capacity, trace.size(), misses);
}

}  // namespace

SimResult simulate_lru(const Trace& trace, std::size_t capacity) {
  return run(trace, capacity, "LRU", LruCache(capacity));
}

SimResult simulate_lfu(const Trace& trace, std::size_t capacity) {
  return run(trace, capacity, "LFU", LfuCache(capacity));
}

SimResult simulate_2q(const Trace& trace, std::size_t capacity, double kin_frac, double kout_frac) {
  return run(trace, capacity, "2Q", TwoQCache(capacity, kin_frac, kout_frac));
}

SimResult simulate_arc(const Trace& trace, std::size_t capacity) {
  return run(trace, capacity, "ARC", ArcCache(capacity));
}

SimResult simulate_opt(const Trace& trace, std::size_t capacity) {
  FarthestNextUseCache cache(capacity);
  const RdSeries frd = forward_rd(trace);
  std::size_t misses = 0;
  for (std::size_t t = 0; t < trace.size(); ++t)
    misses += !cache.access(trace[t], is_finite(frd[t]) ? t + frd[t] : kInfinite);
  return make_result("OPT", capacity, trace.size(), misses);
}

SimResult simulate_popt(const Trace& trace, std::size_t capacity, Predictor& predictor,
                        const SampleEncoding& encoding) {
  FarthestNextUseCache cache(capacity);
  const std::uint64_t n = trace.size();
  std::optional<OnlineSampler> sampler;
  if (predictor.uses_features())
    sampler.emplace(encoding.sequence_length, encoding.feature_options, encoding.clusters, encoding.scaler);

  std::size_t misses = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const BlockId block = trace[i];
    std::span<const double> sample;
    if (sampler) sample = sampler->step(block);
    Distance frd;
    try {
      frd = predictor.predict(i, sample);
    } catch (const std::exception& e) {
      throw Error("predictor failed at access " + std::to_string(i) + ": " + e.what());
    }
    const std::uint64_t next = is_finite(frd) && frd <= n ? i + frd : i + n + 1;
    misses += !cache.access(block, next);
  }
  return make_result("pOPT", capacity, trace.size(), misses);
}

std::size_t brute_force_min_misses(const Trace& trace, std::size_t capacity) {
  if (capacity == 0) throw Error("cache capacity must be >= 1 block");
  const std::unordered_set<BlockId> distinct(trace.blocks().begin(), trace.blocks().end());
  if (trace.size() > 30) throw Error("brute_force_min_misses: trace longer than 30 accesses");
  if (capacity > 3 && capacity < distinct.size())
    throw Error("brute_force_min_misses: capacity above 3 blocks");

  using State = std::pair<std::size_t, std::vector<BlockId>>;
  std::map<State, std::size_t> memo;
  auto solve = [&](auto&& self, std::size_t pos, const std::vector<BlockId>& cache) -> std::size_t {
    if (pos == trace.size()) return 0;
    State key{pos, cache};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const BlockId b = trace[pos];
    std::size_t best;
    if (std::binary_search(cache.begin(), cache.end(), b)) {
      best = self(self, pos + 1, cache);
    } else if (cache.size() < capacity) {
      auto next = cache;
      next.insert(std::lower_bound(next.begin(), next.end(), b), b);
      best = 1 + self(self, pos + 1, next);
    } else {
      best = std::numeric_limits<std::size_t>::max();
      for (std::size_t v = 0; v < cache.size(); ++v) {
        auto next = cache;
        next.erase(next.begin() + static_cast<std::ptrdiff_t>(v));
        next.insert(std::lower_bound(next.begin(), next.end(), b), b);
        best = std::min(best, 1 + self(self, pos + 1, next));
      }
    }
    memo.emplace(std::move(key), best);
    return best;
  };
  return solve(solve, 0, {});
}

SimResult simulate(const Trace& trace, const PolicySpec& spec, std::size_t capacity) {
  SimResult r;
  switch (spec.kind) {
    case PolicyKind::kLru: r = simulate_lru(trace, capacity); break;
    case PolicyKind::kLfu: r = simulate_lfu(trace, capacity); break;
    case PolicyKind::kTwoQ: r = simulate_2q(trace, capacity); break;
    case PolicyKind::kArc: r = simulate_arc(trace, capacity); break;
    case PolicyKind::kOpt: r = simulate_opt(trace, capacity); break;
    case PolicyKind::kPopt:
      if (!spec.predictor) throw Error("pOPT requires a predictor");
      r = simulate_popt(trace, capacity, *spec.predictor, spec.encoding);
      break;
  }
  if (!spec.label.empty()) r.policy = spec.label;
  return r;
}

Mrc mrc(const Trace& trace, const PolicySpec& spec, const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw Error("mrc: no cache sizes");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw Error("mrc: cache sizes must be strictly ascending");
  Mrc curve;
  curve.policy = spec.label.empty() ? policy_name(spec.kind) : spec.label;
  for (std::size_t c : sizes) {
    SimResult r = simulate(trace, spec, c);
    curve.sizes.push_back(c);
    curve.ratios.push_back(r.miss_ratio);
    curve.results.push_back(std::move(r));
  }
  if (spec.kind == PolicyKind::kLru || spec.kind == PolicyKind::kOpt)
    for (std::size_t i = 1; i < curve.results.size(); ++i)
      if (curve.results[i].misses > curve.results[i - 1].misses)
        throw Error(curve.policy + " miss ratio curve increases with cache size");
  return curve;
}

void write_results_csv(const std::vector<SimResult>& results, std::ostream& out) {
  out << "policy,cache_size_blocks,accesses,misses,miss_ratio\n";
  char buf[64];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%.10f", r.miss_ratio);
    out << r.policy << ',' << r.cache_size << ',' << r.accesses << ',' << r.misses << ',' << buf << '\n';
  }
}

std::vector<SimResult> read_results_csv(std::istream& in) {
  std::vector<SimResult> results;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("policy,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field[5];
    for (auto& f : field)
      if (!std::getline(ss, f, ',')) throw ParseError("expected 5 fields", line_no);
    try {
      SimResult r;
      r.policy = field[0];
      r.cache_size = std::stoull(field[1]);
      r.accesses = std::stoull(field[2]);
      r.misses = std::stoull(field[3]);
      r.miss_ratio = std::stod(field[4]);
      results.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("bad numeric field", line_no);
    }
  }
  return results;
}

}  // namespace fwdrd
