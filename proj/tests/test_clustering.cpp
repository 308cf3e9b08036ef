#include <doctest.h>

#include "fwdrd/clustering.hpp"
#include "oracles.hpp"

using namespace fwdrd;

TEST_CASE("two well separated groups") {
  const std::vector<std::int64_t> deltas{0, 1, 2, 100, 101, 102};
  const auto [lo, hi] = oracle::best_two_partition({0, 1, 2, 100, 101, 102});
  for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
    const ClusterModel m = kmeans(deltas, 2, seed);
    REQUIRE(m.k() == 2);
    CHECK(m.centroids[0] == doctest::Approx(lo));
    CHECK(m.centroids[1] == doctest::Approx(hi));
  }
  CHECK(lo == 1.0);
  CHECK(hi == 101.0);
}

TEST_CASE("k equal to the distinct count reproduces the values") {
  const std::vector<std::int64_t> deltas{5, -3, 5, 8, 0, -3, 12};
  const ClusterModel m = kmeans(deltas, 5, 7);
  CHECK(m.centroids == std::vector<double>{-3, 0, 5, 8, 12});
  CHECK(inertia(m, deltas) == 0.0);
}

TEST_CASE("single value") {
  const std::vector<std::int64_t> deltas(10, 4);
  const ClusterModel m = kmeans(deltas, 1, 1);
  CHECK(m.centroids == std::vector<double>{4.0});
  CHECK_THROWS(kmeans(deltas, 2, 1));
  CHECK_THROWS(kmeans(std::vector<std::int64_t>{}, 1, 1));
}

TEST_CASE("assignment: nearest centroid, ties low") {
  const ClusterModel m{{1.0, 101.0}, 0};
  CHECK(m.assign(2) == 0);
  CHECK(m.assign(51) == 0);
  CHECK(m.assign(52) == 1);
  CHECK(m.assign(10000) == 1);
  CHECK(m.assign(-10000) == 0);
}

TEST_CASE("inertia is non-increasing and seeds are reproducible") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::int64_t> deltas(400);
    for (auto& d : deltas) d = static_cast<std::int64_t>(rng.next() % 2000) - 1000;
    std::vector<double> history;
    const ClusterModel a = kmeans(deltas, 6, 99, {}, &history);
    for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] * (1 + 1e-12));
    const ClusterModel b = kmeans(deltas, 6, 99);
    CHECK(a == b);
    CHECK(std::is_sorted(a.centroids.begin(), a.centroids.end()));

    // Fixed point: one more Lloyd step does not lower inertia.
    std::vector<double> sum(a.k(), 0.0), cnt(a.k(), 0.0);
    for (auto d : deltas) {
      sum[a.assign(d)] += static_cast<double>(d);
      cnt[a.assign(d)] += 1;
    }
    ClusterModel stepped = a;
    for (std::size_t j = 0; j < a.k(); ++j)
      if (cnt[j] > 0) stepped.centroids[j] = sum[j] / cnt[j];
    std::sort(stepped.centroids.begin(), stepped.centroids.end());
    CHECK(inertia(a, deltas) <= inertia(stepped, deltas) * (1 + 1e-9) + 1e-9);
  }
}

TEST_CASE("auto partition prefers balanced populations") {
  const std::vector<std::int64_t> deltas{0, 1, 2, 100, 101, 102};
  const AutoPartitionResult r = auto_partition(deltas, 2, 4, 42);
  REQUIRE(r.cv_by_k.size() == 3);
  // Brute-force CV for each candidate k.
  for (std::size_t k = 2; k <= 4; ++k) {
    const ClusterModel m = kmeans(deltas, k, 42);
    CHECK(r.cv_by_k[k - 2] == doctest::Approx(coefficient_of_variation(cluster_populations(m, deltas))));
  }
  CHECK(r.cv_by_k[0] == 0.0);
  CHECK(r.model.k() == 2);

  const AutoPartitionResult single = auto_partition(std::vector<std::int64_t>{3, 3, 3}, 1, 1, 0);
  CHECK(single.model.k() == 1);

  CHECK(auto_partition(std::vector<std::int64_t>{1, 2}, 2, 16, 0).model.k() == 2);
  CHECK_THROWS(auto_partition(std::vector<std::int64_t>{1, 1}, 2, 4, 0));
}

TEST_CASE("assign is total") {
  const ClusterModel m{{-5.0, 0.0, 7.5}, 0};
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto d = static_cast<std::int64_t>(rng.next());
    const auto c = m.assign(d);
    CHECK(c < 3);
  }
}
