#pragma once

#include <span>
#include <vector>

#include "fwdrd/common.hpp"

namespace fwdrd {

/// Supplies a forward reuse distance for the access at `time`, given the
/// scaled sample (sequence_length x 6, row-major) ending at that access.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual Distance predict(std::size_t time, std::span<const double> sample) = 0;

  /// False for predictors that ignore the sample; the simulator then skips
  /// feature extraction.
  virtual bool uses_features() const { return true; }
};

/// Returns a fixed, precomputed sequence of predictions indexed by time.
/// With forward_rd(trace) this is the exact future oracle.
class ReplayPredictor final : public Predictor {
 public:
  explicit ReplayPredictor(std::vector<Distance> predictions) : predictions_(std::move(predictions)) {}

  Distance predict(std::size_t time, std::span<const double>) override {
    if (time >= predictions_.size()) throw Error("replay predictor exhausted at access " + std::to_string(time));
    return predictions_[time];
  }
  bool uses_features() const override { return false; }

 private:
  std::vector<Distance> predictions_;
};

/// Always predicts the same distance.
class ConstantPredictor final : public Predictor {
 public:
  explicit ConstantPredictor(Distance value) : value_(value) {}
  Distance predict(std::size_t, std::span<const double>) override { return value_; }
  bool uses_features() const override { return false; }

 private:
  Distance value_;
};

}  // namespace fwdrd
