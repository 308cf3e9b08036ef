#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fwdrd/common.hpp"
#include "fwdrd/rnn.hpp"

namespace fwdrd::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Flat run configuration. Defaults follow the published training setup
/// where one exists (lr 0.001, dropout 0.2, width 256, 2 layers, windows 100/50).
struct RunConfig {
  std::string trace;
  std::string format = "plain";
  std::uint64_t block_size = kDefaultBlockSize;
  bool expand_multiblock = false;

  std::size_t k_avg = kDefaultAvgWindow;
  std::size_t k_freq = kDefaultFreqWindow;
  std::size_t sequence_length = 64;
  std::size_t k_min = 2;
  std::size_t k_max = 16;
  double train_ratio = kDefaultTrainRatio;
  std::size_t train_take = 0;  ///< 0 = whole training pool
  std::size_t val_take = 0;    ///< 0 = whole validation pool
  bool debug_csv = false;

  rnn::TrainConfig train;

  std::vector<std::string> policies = {"lru", "lfu", "2q", "arc", "opt", "popt"};
  std::vector<std::size_t> sizes;  ///< empty = derived from the trace footprint
  std::size_t inference_batch = 256;
  bool svg = true;

  std::string out = "out";
  std::uint64_t seed = 42;
  std::string dataset;     ///< default <out>/dataset.rlds
  std::string checkpoint;  ///< default <out>/checkpoint.rlck
  std::string results;     ///< default <out>/sim_results.csv

  /// Applies one `key=value` setting; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; '#' starts a comment line.
  void load_file(const std::string& path);
  /// Pushes the top-level seed into every seeded component.
  void finalize();

  std::string dataset_path() const;
  std::string checkpoint_path() const;
  std::string results_path() const;
  std::string out_path(const std::string& name) const;
};

}  // namespace fwdrd::cli
