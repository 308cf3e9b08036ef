#include "fwdrd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fwdrd {

std::array<double, kFeatureDim> FeatureVector::encode() const {
  return {static_cast<double>(addr_delta), encode_distance(rd), encode_distance(penult_rd),
          win_avg_rd, static_cast<double>(win_freq), static_cast<double>(cluster_id)};
}

double ScalerParams::scale(double value, std::size_t dim) const {
  const double lo = min[dim], hi = max[dim];
  if (hi == lo) return 0.0;
  const double s = 2.0 * (value - lo) / (hi - lo) - 1.0;
  return std::clamp(s, -1.0, 1.0);
}

double ScalerParams::unscale(double scaled, std::size_t dim) const {
  const double lo = min[dim], hi = max[dim];
  if (hi == lo) return lo;
  return lo + (scaled + 1.0) * (hi - lo) / 2.0;
}

ScalerParams fit_scaler(std::span<const FeatureVector> rows, std::span<const Distance> targets) {
  if (rows.empty() || targets.empty()) throw Error("fit_scaler: nothing to fit");
  ScalerParams s;
  s.min.fill(std::numeric_limits<double>::infinity());
  s.max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& row : rows) {
    const auto v = row.encode();
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      s.min[d] = std::min(s.min[d], v[d]);
      s.max[d] = std::max(s.max[d], v[d]);
    }
  }
  for (Distance t : targets) {
    const double v = encode_distance(t);
    s.min[kTargetDim] = std::min(s.min[kTargetDim], v);
    s.max[kTargetDim] = std::max(s.max[kTargetDim], v);
  }
  for (std::size_t d : {static_cast<std::size_t>(Feature::kRd),
                        static_cast<std::size_t>(Feature::kPenultRd), kTargetDim})
    s.min[d] = 0.0;
  return s;
}

std::vector<FeatureVector> build_feature_matrix(const Trace& trace, const ClusterModel& clusters,
                                                const FeatureOptions& options) {
  LocalityTracker tracker(options.k_avg, options.k_freq);
  std::vector<FeatureVector> rows;
  rows.reserve(trace.size());
  for (BlockId b : trace.blocks()) {
    const LocalityFeatures f = tracker.step(b);
    rows.push_back({f.addr_delta, f.rd, f.penult_rd, f.win_avg_rd, f.win_freq,
                    clusters.assign(f.addr_delta)});
  }
  return rows;
}

namespace {

std::size_t train_pool_size(std::size_t n_samples, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n_samples)));
}

}  // namespace

Dataset make_samples(std::span<const FeatureVector> features, std::span<const Distance> targets,
                     std::size_t sequence_length, const ClusterModel& clusters,
                     const FeatureOptions& options, double train_ratio) {
  const std::size_t n = features.size();
  if (targets.size() != n) throw Error("make_samples: features and targets differ in length");
  if (sequence_length == 0) throw Error("make_samples: sequence_length must be >= 1");
  if (sequence_length > n)
    throw Error("make_samples: sequence_length " + std::to_string(sequence_length) +
                " exceeds trace length " + std::to_string(n));
  if (!(train_ratio > 0.0 && train_ratio <= 1.0)) throw Error("make_samples: bad train ratio");

  const std::size_t L = sequence_length;
  const std::size_t count = n - L + 1;
  std::size_t pool = train_pool_size(count, train_ratio);
  if (pool == 0) pool = count;

  Dataset d;
  d.sequence_length = L;
  d.feature_options = options;
  d.train_ratio = train_ratio;
  d.clusters = clusters;
  // Training pool samples cover accesses [0, L - 1 + pool - 1]; targets are at t >= L - 1.
  d.scaler = fit_scaler(features.first(L - 1 + pool), targets.subspan(L - 1, pool));

  std::vector<float> scaled(n * kFeatureDim);
  for (std::size_t t = 0; t < n; ++t) {
    const auto raw = features[t].encode();
    for (std::size_t k = 0; k < kFeatureDim; ++k)
      scaled[t * kFeatureDim + k] = static_cast<float>(d.scaler.scale(raw[k], k));
  }

  d.origins.resize(count);
  d.targets.resize(count);
  d.features.resize(count * L * kFeatureDim);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t t = i + L - 1;
    d.origins[i] = t;
    d.targets[i] = static_cast<float>(d.scaler.scale(encode_distance(targets[t]), kTargetDim));
    std::copy_n(scaled.begin() + static_cast<std::ptrdiff_t>((t + 1 - L) * kFeatureDim),
                L * kFeatureDim, d.features.begin() + static_cast<std::ptrdiff_t>(i * L * kFeatureDim));
  }
  return d;
}

Dataset prepare_dataset(const Trace& trace, const PrepareOptions& options) {
  if (trace.empty()) throw Error("prepare_dataset: empty trace");
  const auto deltas = address_deltas(trace);
  const ClusterModel clusters =
      auto_partition(deltas, options.k_min, options.k_max, options.seed).model;
  const auto features = build_feature_matrix(trace, clusters, options.features);
  const auto targets = forward_rd(trace);
  return make_samples(features, targets, options.sequence_length, clusters, options.features,
                      options.train_ratio);
}

Split split(std::size_t n_samples, double ratio, std::size_t train_take, std::size_t val_take) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split: ratio must be in (0, 1)");
  const std::size_t pool = train_pool_size(n_samples, ratio);
  const std::size_t val_pool = n_samples - pool;
  if (train_take > pool)
    throw Error("split: train take " + std::to_string(train_take) + " exceeds pool of " +
                std::to_string(pool));
  if (val_take > val_pool)
    throw Error("split: validation take " + std::to_string(val_take) + " exceeds pool of " +
                std::to_string(val_pool));
  return Split{{pool - train_take, pool}, {pool, pool + val_take}};
}

void write_scaler(binio::Writer& w, const ScalerParams& s) {
  w.put<std::uint32_t>(kScalerDims);
  for (std::size_t d = 0; d < kScalerDims; ++d) {
    w.put(s.min[d]);
    w.put(s.max[d]);
  }
}

ScalerParams read_scaler(binio::Reader& r) {
  if (r.get<std::uint32_t>() != kScalerDims) throw FormatError("scaler dimension mismatch");
  ScalerParams s;
  for (std::size_t d = 0; d < kScalerDims; ++d) {
    s.min[d] = r.get<double>();
    s.max[d] = r.get<double>();
  }
  return s;
}

void write_clusters(binio::Writer& w, const ClusterModel& m) {
  w.put<std::uint64_t>(m.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.k()));
  w.put_array<double>(m.centroids);
}

ClusterModel read_clusters(binio::Reader& r) {
  ClusterModel m;
  m.seed = r.get<std::uint64_t>();
  const auto k = r.get<std::uint32_t>();
  if (k > r.remaining() / sizeof(double)) throw FormatError("cluster count out of range");
  m.centroids.resize(k);
  r.get_array<double>(m.centroids);
  return m;
}

std::vector<std::uint8_t> serialize(const Dataset& d) {
  binio::Writer w;
  w.put_magic("RLDS");
  w.put<std::uint16_t>(kDatasetVersion);
  write_scaler(w, d.scaler);
  write_clusters(w, d.clusters);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.feature_options.k_avg));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.feature_options.k_freq));
  w.put<double>(d.train_ratio);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.sequence_length));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kFeatureDim));
  w.put<std::uint64_t>(d.size());
  w.put_array<std::uint64_t>(d.origins);
  w.put_array<float>(d.targets);
  w.put_array<float>(d.features);
  w.seal();
  return std::move(w).take();
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  binio::Reader r = binio::open_container(bytes, "RLDS", kDatasetVersion);
  Dataset d;
  d.scaler = read_scaler(r);
  d.clusters = read_clusters(r);
  d.feature_options.k_avg = r.get<std::uint32_t>();
  d.feature_options.k_freq = r.get<std::uint32_t>();
  d.train_ratio = r.get<double>();
  d.sequence_length = r.get<std::uint32_t>();
  if (r.get<std::uint32_t>() != kFeatureDim) throw FormatError("feature width mismatch");
  const auto n = r.get<std::uint64_t>();
  const std::size_t per_sample = sizeof(std::uint64_t) + sizeof(float) * (1 + d.sample_stride());
  if (n > r.remaining() / per_sample) throw FormatError("sample count exceeds file size");
  d.origins.resize(n);
  d.targets.resize(n);
  d.features.resize(n * d.sample_stride());
  r.get_array<std::uint64_t>(d.origins);
  r.get_array<float>(d.targets);
  r.get_array<float>(d.features);
  if (r.remaining() != 0) throw FormatError("trailing bytes in dataset");
  return d;
}

void save(const Dataset& d, const std::string& path) { binio::write_file(path, serialize(d)); }

Dataset load_dataset(const std::string& path) { return deserialize_dataset(binio::read_file(path)); }

void export_debug_csv(const Dataset& d, std::ostream& out) {
  out << "sample,origin_time,step,access_time,f0,f1,f2,f3,f4,f5,target\n";
  const std::size_t L = d.sequence_length;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto s = d.sample(i);
    for (std::size_t step = 0; step < L; ++step) {
      out << i << ',' << d.origins[i] << ',' << step << ',' << d.origins[i] + 1 - L + step;
      for (std::size_t k = 0; k < kFeatureDim; ++k) out << ',' << s[step * kFeatureDim + k];
      out << ',' << d.targets[i] << '\n';
    }
  }
}

OnlineSampler::OnlineSampler(std::size_t sequence_length, FeatureOptions options,
                             ClusterModel clusters, ScalerParams scaler)
    : sequence_length_(sequence_length),
      clusters_(std::move(clusters)),
      scaler_(scaler),
      tracker_(options.k_avg, options.k_freq),
      ring_(sequence_length * kFeatureDim, 0.0),
      sample_(sequence_length * kFeatureDim, 0.0) {
  if (sequence_length == 0) throw Error("OnlineSampler: sequence_length must be >= 1");
}

std::span<const double> OnlineSampler::step(BlockId block) {
  const LocalityFeatures f = tracker_.step(block);
  const FeatureVector row{f.addr_delta, f.rd, f.penult_rd, f.win_avg_rd, f.win_freq,
                          clusters_.assign(f.addr_delta)};
  const auto raw = row.encode();
  // Overwrite the oldest row; rounding through float matches the stored datasets.
  double* slot = ring_.data() + head_ * kFeatureDim;
  for (std::size_t k = 0; k < kFeatureDim; ++k)
    slot[k] = static_cast<double>(static_cast<float>(scaler_.scale(raw[k], k)));
  head_ = (head_ + 1) % sequence_length_;

  // Rows before the first access stay zero from construction.
  const std::size_t split_rows = sequence_length_ - head_;
  std::copy_n(ring_.begin() + static_cast<std::ptrdiff_t>(head_ * kFeatureDim),
              split_rows * kFeatureDim, sample_.begin());
  std::copy_n(ring_.begin(), head_ * kFeatureDim,
              sample_.begin() + static_cast<std::ptrdiff_t>(split_rows * kFeatureDim));
  return sample_;
}

}  // namespace fwdrd
