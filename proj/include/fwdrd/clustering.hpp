#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fwdrd/common.hpp"

namespace fwdrd {

/// One-dimensional K-means model over address deltas.
/// Centroids are kept sorted ascending; cluster ids index into them.
struct ClusterModel {
  std::vector<double> centroids;
  std::uint64_t seed = 0;

  std::size_t k() const noexcept { return centroids.size(); }

  /// Nearest centroid, ties to the lower index.
  std::uint32_t assign(std::int64_t delta) const;

  bool operator==(const ClusterModel&) const = default;
};

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-6;
};

/// Lloyd's algorithm with k-means++ seeding over the distinct delta values,
/// each weighted by how often it occurs. If `inertia_history` is non-null it
/// receives the weighted inertia measured at each assignment step.
ClusterModel kmeans(std::span<const std::int64_t> deltas, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {},
                    std::vector<double>* inertia_history = nullptr);

/// Weighted sum of squared distances to the assigned centroid.
double inertia(const ClusterModel& model, std::span<const std::int64_t> deltas);

/// Accesses per cluster under `model`.
std::vector<std::size_t> cluster_populations(const ClusterModel& model,
                                             std::span<const std::int64_t> deltas);

/// Population standard deviation over mean.
double coefficient_of_variation(std::span<const std::size_t> populations);

struct AutoPartitionResult {
  ClusterModel model;
  std::vector<double> cv_by_k;  ///< cv_by_k[i] belongs to k = k_min + i
};

/// Runs kmeans for every k in [k_min, k_max] and keeps the model whose
/// cluster populations have the smallest coefficient of variation (ties go
/// to the smaller k). k_max is clipped to the number of distinct deltas.
AutoPartitionResult auto_partition(std::span<const std::int64_t> deltas, std::size_t k_min,
                                   std::size_t k_max, std::uint64_t seed,
                                   const KMeansOptions& options = {});

}  // namespace fwdrd
