#include "fwdrd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fwdrd/random.hpp"

namespace fwdrd {

namespace {

struct WeightedValues {
  std::vector<double> values;
  std::vector<double> weights;
};

WeightedValues distinct_weighted(std::span<const std::int64_t> deltas) {
  std::map<std::int64_t, std::size_t> counts;
  for (auto d : deltas) ++counts[d];
  WeightedValues wv;
  wv.values.reserve(counts.size());
  wv.weights.reserve(counts.size());
  for (auto [v, c] : counts) {
    wv.values.push_back(static_cast<double>(v));
    wv.weights.push_back(static_cast<double>(c));
  }
  return wv;
}

std::size_t nearest(std::span<const double> centroids, double x) {
  std::size_t best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = std::abs(x - centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::size_t sample_weighted(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double r = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (r < acc) return i;
  }
  return last_positive;
}

}  // namespace

std::uint32_t ClusterModel::assign(std::int64_t delta) const {
  if (centroids.empty()) throw Error("cluster model has no centroids");
  const double x = static_cast<double>(delta);
  auto it = std::lower_bound(centroids.begin(), centroids.end(), x);
  if (it == centroids.begin()) return 0;
  if (it == centroids.end()) return static_cast<std::uint32_t>(centroids.size() - 1);
  const auto hi = static_cast<std::size_t>(it - centroids.begin());
  const double d_lo = x - centroids[hi - 1];
  const double d_hi = *it - x;
  return static_cast<std::uint32_t>(d_hi < d_lo ? hi : hi - 1);
}

ClusterModel kmeans(std::span<const std::int64_t> deltas, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options, std::vector<double>* inertia_history) {
  if (deltas.empty()) throw Error("kmeans: no deltas");
  if (k == 0) throw Error("kmeans: k must be >= 1");
  const WeightedValues wv = distinct_weighted(deltas);
  const std::size_t m = wv.values.size();
  if (k > m)
    throw Error("kmeans: k=" + std::to_string(k) + " exceeds " + std::to_string(m) +
                " distinct deltas");

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> centroids;
  centroids.reserve(k);
  centroids.push_back(wv.values[sample_weighted(rng, wv.weights)]);
  std::vector<double> score(m);
  while (centroids.size() < k) {
    for (std::size_t i = 0; i < m; ++i) {
      const double d = wv.values[i] - centroids[nearest(centroids, wv.values[i])];
      score[i] = wv.weights[i] * d * d;
    }
    centroids.push_back(wv.values[sample_weighted(rng, score)]);
  }

  std::vector<double> sum(k), mass(k);
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(mass.begin(), mass.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = nearest(centroids, wv.values[i]);
      const double d = wv.values[i] - centroids[j];
      total += wv.weights[i] * d * d;
      sum[j] += wv.weights[i] * wv.values[i];
      mass[j] += wv.weights[i];
    }
    if (inertia_history) inertia_history->push_back(total);

    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (mass[j] == 0.0) continue;  // empty cluster keeps its centroid
      const double updated = sum[j] / mass[j];
      movement = std::max(movement, std::abs(updated - centroids[j]));
      centroids[j] = updated;
    }
    if (movement < options.tol) break;
  }

  std::sort(centroids.begin(), centroids.end());
  return ClusterModel{std::move(centroids), seed};
}

double inertia(const ClusterModel& model, std::span<const std::int64_t> deltas) {
  double total = 0.0;
  for (auto d : deltas) {
    const double diff = static_cast<double>(d) - model.centroids[model.assign(d)];
    total += diff * diff;
  }
  return total;
}

std::vector<std::size_t> cluster_populations(const ClusterModel& model,
                                             std::span<const std::int64_t> deltas) {
  std::vector<std::size_t> pops(model.k(), 0);
  for (auto d : deltas) ++pops[model.assign(d)];
  return pops;
}

double coefficient_of_variation(std::span<const std::size_t> populations) {
  if (populations.empty()) return 0.0;
  double mean = 0.0;
  for (auto p : populations) mean += static_cast<double>(p);
  mean /= static_cast<double>(populations.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (auto p : populations) {
    const double d = static_cast<double>(p) - mean;
    var += d * d;
  }
  var /= static_cast<double>(populations.size());
  return std::sqrt(var) / mean;
}

AutoPartitionResult auto_partition(std::span<const std::int64_t> deltas, std::size_t k_min,
                                   std::size_t k_max, std::uint64_t seed,
                                   const KMeansOptions& options) {
  if (deltas.empty()) throw Error("auto_partition: no deltas");
  const std::size_t distinct = distinct_weighted(deltas).values.size();
  k_min = std::max<std::size_t>(k_min, 1);
  k_max = std::min(k_max, distinct);
  if (k_min > k_max)
    throw Error("auto_partition: empty k range after clipping to " + std::to_string(distinct) +
                " distinct deltas");

  AutoPartitionResult result;
  double best_cv = 0.0;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    ClusterModel model = kmeans(deltas, k, seed, options);
    const auto pops = cluster_populations(model, deltas);
    const double cv = coefficient_of_variation(pops);
    result.cv_by_k.push_back(cv);
    if (k == k_min || cv < best_cv) {
      best_cv = cv;
      result.model = std::move(model);
    }
  }
  return result;
}

}  // namespace fwdrd
