#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fwdrd/binary_io.hpp"
#include "fwdrd/clustering.hpp"
#include "fwdrd/locality.hpp"
#include "fwdrd/trace_io.hpp"

namespace fwdrd {

inline constexpr std::size_t kFeatureDim = 6;

/// Feature columns, in matrix order.
enum class Feature : std::size_t {
  kAddrDelta = 0,
  kRd = 1,
  kPenultRd = 2,
  kWindowAvgRd = 3,
  kWindowFreq = 4,
  kClusterId = 5,
};
/// Scaler slot for the prediction target (forward reuse distance).
inline constexpr std::size_t kTargetDim = kFeatureDim;
inline constexpr std::size_t kScalerDims = kFeatureDim + 1;

struct FeatureVector {
  std::int64_t addr_delta = 0;
  Distance rd = kInfinite;
  Distance penult_rd = kInfinite;
  double win_avg_rd = 0.0;
  std::uint32_t win_freq = 1;
  std::uint32_t cluster_id = 0;

  /// Raw numeric encoding with infinite distances written as 0.
  std::array<double, kFeatureDim> encode() const;

  bool operator==(const FeatureVector&) const = default;
};

/// Raw target encoding: forward reuse distance, infinite as 0.
inline double encode_distance(Distance d) { return is_finite(d) ? static_cast<double>(d) : 0.0; }

/// Min-max scaling of every feature column and the target to [-1, 1].
struct ScalerParams {
  std::array<double, kScalerDims> min{};
  std::array<double, kScalerDims> max{};

  /// Clamped to [-1, 1]. Degenerate columns (max == min) map to 0.
  double scale(double value, std::size_t dim) const;
  /// Inverse of scale() on the fitted range. Degenerate columns return min.
  double unscale(double scaled, std::size_t dim) const;

  bool operator==(const ScalerParams&) const = default;
};

/// Fits min/max over the given raw rows and targets. Distance-valued columns
/// (rd, penultimate rd, target) have their lower bound pinned at 0 so that the
/// infinite-distance code always scales to -1.
ScalerParams fit_scaler(std::span<const FeatureVector> rows, std::span<const Distance> targets);

struct FeatureOptions {
  std::size_t k_avg = kDefaultAvgWindow;
  std::size_t k_freq = kDefaultFreqWindow;
  bool operator==(const FeatureOptions&) const = default;
};

/// One feature vector per access; single pass.
std::vector<FeatureVector> build_feature_matrix(const Trace& trace, const ClusterModel& clusters,
                                                const FeatureOptions& options = {});

inline constexpr double kDefaultTrainRatio = 0.8;

/// Scaled samples of shape (#samples, sequence_length, 6) with scalar targets.
/// Sample i covers accesses [origin(i) - L + 1, origin(i)] and predicts the
/// forward reuse distance at origin(i).
class Dataset {
 public:
  std::size_t sequence_length = 0;
  FeatureOptions feature_options;
  double train_ratio = kDefaultTrainRatio;
  ScalerParams scaler;
  ClusterModel clusters;

  std::vector<std::uint64_t> origins;
  std::vector<float> targets;
  std::vector<float> features;  ///< row-major, size() * sequence_length * 6

  std::size_t size() const noexcept { return origins.size(); }
  std::size_t sample_stride() const noexcept { return sequence_length * kFeatureDim; }
  std::span<const float> sample(std::size_t i) const {
    return std::span<const float>(features).subspan(i * sample_stride(), sample_stride());
  }

  bool operator==(const Dataset&) const = default;
};

/// Builds one sample per t in [L-1, n-1]. The scaler is fitted on the accesses
/// covered by the training pool (the first `train_ratio` of samples) only.
Dataset make_samples(std::span<const FeatureVector> features, std::span<const Distance> targets,
                     std::size_t sequence_length, const ClusterModel& clusters,
                     const FeatureOptions& options = {}, double train_ratio = kDefaultTrainRatio);

/// Trace -> auto-partitioned clusters -> features -> samples.
struct PrepareOptions {
  FeatureOptions features;
  std::size_t sequence_length = 64;
  std::size_t k_min = 2;
  std::size_t k_max = 16;
  std::uint64_t seed = 42;
  double train_ratio = kDefaultTrainRatio;
};
Dataset prepare_dataset(const Trace& trace, const PrepareOptions& options);

/// Half-open sample index ranges.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const SampleRange&) const = default;
};

struct Split {
  SampleRange train;
  SampleRange validation;
};

/// The first `ratio` of samples form the training pool and the rest the
/// validation pool. Training takes the LAST `train_take` samples of its pool,
/// validation the FIRST `val_take` of its pool.
Split split(std::size_t n_samples, double ratio, std::size_t train_take, std::size_t val_take);
inline Split split(const Dataset& d, double ratio, std::size_t train_take, std::size_t val_take) {
  return split(d.size(), ratio, train_take, val_take);
}

inline constexpr std::uint16_t kDatasetVersion = 1;

std::vector<std::uint8_t> serialize(const Dataset& d);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);
void save(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

/// One row per (sample, step): sample,origin_time,step,access_time,f0..f5,target.
void export_debug_csv(const Dataset& d, std::ostream& out);

void write_scaler(binio::Writer& w, const ScalerParams& s);
ScalerParams read_scaler(binio::Reader& r);
void write_clusters(binio::Writer& w, const ClusterModel& m);
ClusterModel read_clusters(binio::Reader& r);

/// Streaming sample builder used for online inference: keeps the last
/// sequence_length scaled rows and zero-pads on the left while warming up.
class OnlineSampler {
 public:
  OnlineSampler(std::size_t sequence_length, FeatureOptions options, ClusterModel clusters,
                ScalerParams scaler);

  /// Consumes one access and returns the current scaled sample
  /// (sequence_length x 6, row-major). The view is valid until the next step().
  std::span<const double> step(BlockId block);

  std::size_t time() const noexcept { return tracker_.time(); }
  std::size_t sequence_length() const noexcept { return sequence_length_; }

 private:
  std::size_t sequence_length_;
  ClusterModel clusters_;
  ScalerParams scaler_;
  LocalityTracker tracker_;
  std::vector<double> ring_;  ///< sequence_length rows, circular
  std::size_t head_ = 0;      ///< index of the oldest row
  std::vector<double> sample_;
};

}  // namespace fwdrd

namespace fwdrd {

/// Parameters for rebuilding scaled samples online from a trace.
struct SampleEncoding {
  std::size_t sequence_length = 1;
  FeatureOptions feature_options;
  ClusterModel clusters{{0.0}, 0};
  ScalerParams scaler;
};

}  // namespace fwdrd
