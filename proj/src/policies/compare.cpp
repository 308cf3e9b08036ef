#include <cstdio>
#include <map>
#include <ostream>

#include "fwdrd/policies.hpp"

namespace fwdrd {

std::vector<CompareRow> compare_results(const std::vector<SimResult>& results) {
  if (results.empty()) throw Error("compare: no results");
  std::map<std::size_t, double> opt, lru;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SimResult*>> by_policy;
  for (const auto& r : results) {
    if (r.policy == "OPT") opt[r.cache_size] = r.miss_ratio;
    if (r.policy == "LRU") lru[r.cache_size] = r.miss_ratio;
    auto [it, inserted] = by_policy.try_emplace(r.policy);
    if (inserted) order.push_back(r.policy);
    it->second.push_back(&r);
  }

  std::vector<CompareRow> rows;
  for (const auto& name : order) {
    CompareRow row;
    row.policy = name;
    for (const SimResult* r : by_policy[name]) {
      const auto o = opt.find(r->cache_size);
      const auto l = lru.find(r->cache_size);
      if (o == opt.end() || l == lru.end())
        throw Error("compare: cache size " + std::to_string(r->cache_size) + " lacks an OPT or LRU row");
      row.mean_miss_ratio += r->miss_ratio;
      row.mean_delta_vs_opt += r->miss_ratio - o->second;
      row.mean_delta_vs_lru += r->miss_ratio - l->second;
      ++row.sizes;
    }
    const auto n = static_cast<double>(row.sizes);
    row.mean_miss_ratio /= n;
    row.mean_delta_vs_opt /= n;
    row.mean_delta_vs_lru /= n;
    rows.push_back(row);
  }
  return rows;
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
  out << "policy,sizes,mean_miss_ratio,mean_delta_vs_opt,mean_delta_vs_lru\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f,%.10f,%.10f", r.sizes, r.mean_miss_ratio,
                  r.mean_delta_vs_opt, r.mean_delta_vs_lru);
    out << r.policy << ',' << buf << '\n';
  }
}

}  // namespace fwdrd
