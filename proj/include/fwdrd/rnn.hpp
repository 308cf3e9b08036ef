#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fwdrd/dataset.hpp"
#include "fwdrd/predictor.hpp"

namespace fwdrd::rnn {

/// Gate blocks are stacked in the order input, forget, output, candidate.
enum Gate : Eigen::Index { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidate = 3 };

/// One LSTM layer. `weights` multiplies the concatenation [x_t, h_{t-1}]:
/// shape (4*width) x (input_dim + width).
struct LstmLayerParams {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  Eigen::Index width() const { return bias.size() / 4; }
  Eigen::Index input_dim() const { return weights.cols() - width(); }

  auto gate_weights(Gate g) { return weights.middleRows(g * width(), width()); }
  auto gate_weights(Gate g) const { return weights.middleRows(g * width(), width()); }
  auto gate_bias(Gate g) { return bias.segment(g * width(), width()); }
  auto gate_bias(Gate g) const { return bias.segment(g * width(), width()); }

  bool operator==(const LstmLayerParams& o) const {
    return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
           weights == o.weights && bias.size() == o.bias.size() && bias == o.bias;
  }
};

/// Stacked LSTM with a linear dense head on the last step's hidden state.
/// The same type doubles as a gradient container.
struct ModelParams {
  std::vector<LstmLayerParams> layers;
  Eigen::RowVectorXd dense_w;
  double dense_b = 0.0;
  std::size_t sequence_length = 0;

  std::size_t width() const { return static_cast<std::size_t>(dense_w.size()); }
  std::size_t parameter_count() const;
  ModelParams zeros_like() const;

  /// Visits every parameter block as (data, count), layers first, then the head.
  template <typename F>
  void for_each_block(F&& f) {
    for (auto& l : layers) {
      f(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
      f(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    f(dense_w.data(), static_cast<std::size_t>(dense_w.size()));
    f(&dense_b, std::size_t{1});
  }
  template <typename F>
  void for_each_block(F&& f) const {
    const_cast<ModelParams*>(this)->for_each_block(
        [&](double* p, std::size_t n) { f(static_cast<const double*>(p), n); });
  }

  /// Flat parameter access in for_each_block order.
  double& at(std::size_t flat_index);
  double at(std::size_t flat_index) const;

  bool operator==(const ModelParams& o) const {
    return layers == o.layers && dense_w.size() == o.dense_w.size() && dense_w == o.dense_w &&
           dense_b == o.dense_b && sequence_length == o.sequence_length;
  }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases, forget-gate bias +1.
ModelParams init_params(std::size_t width, std::size_t layers, std::size_t sequence_length,
                        std::uint64_t seed, std::size_t input_dim = kFeatureDim);

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// One LSTM step on a single input.
CellState lstm_cell_forward(const LstmLayerParams& layer, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev);

/// Inverted-dropout multipliers for the hidden sequence passed from layer l
/// to layer l+1: masks[l] has shape width x (sequence_length * batch), with
/// step t occupying columns [t*batch, (t+1)*batch).
using DropoutMasks = std::vector<Eigen::MatrixXd>;

/// Step-major batch input: `inputs` is input_dim x (sequence_length * batch).
struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::RowVectorXd targets;
  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
};

/// Packs samples [begin, end) of a dataset into a step-major batch.
Batch make_batch(const Dataset& data, std::size_t begin, std::size_t end);
/// Packs row-major (sequence_length x input_dim) samples.
Batch make_batch(std::span<const std::span<const double>> samples, std::size_t sequence_length,
                 std::span<const double> targets = {});

/// Predictions for every sample of the batch (1 x batch).
Eigen::RowVectorXd forward(const ModelParams& params, const Batch& batch,
                           const DropoutMasks* masks = nullptr);

/// Prediction for one row-major sample of shape (sequence_length, 6).
double model_forward(const ModelParams& params, std::span<const double> sample,
                     const DropoutMasks* masks = nullptr);

double loss(double prediction, double target);
double batch_loss(const Eigen::RowVectorXd& predictions, const Eigen::RowVectorXd& targets);

struct LossAndGradients {
  double loss = 0.0;
  ModelParams gradients;
};

/// Mean squared error over the batch and its exact gradient by
/// backpropagation through time.
LossAndGradients backward(const ModelParams& params, const Batch& batch,
                          const DropoutMasks* masks = nullptr);

DropoutMasks sample_dropout_masks(const ModelParams& params, std::size_t batch_size,
                                  double rate, std::uint64_t seed);

struct TrainConfig {
  std::size_t epochs = 1000;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  double dropout = 0.2;
  std::uint64_t seed = 42;
  std::size_t patience = 20;  ///< 0 disables early stopping
  double min_delta = 0.0;     ///< improvement needed to reset patience
  std::size_t width = 256;
  std::size_t layers = 2;
  double clip_norm = 5.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  bool operator==(const EpochStats&) const = default;
};

/// Everything needed to rebuild samples and run inference.
struct Checkpoint {
  ModelParams params;
  ScalerParams scaler;
  ClusterModel clusters;
  FeatureOptions feature_options;
  TrainConfig config;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;

  std::size_t sequence_length() const { return params.sequence_length; }
  bool operator==(const Checkpoint&) const = default;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Adam over fixed-order mini-batches with inverted dropout between layers,
/// global gradient-norm clipping and early stopping on validation MSE.
/// Returns the parameters of the best validation epoch.
Checkpoint train(const Dataset& data, const Split& split, const TrainConfig& config,
                 const std::function<void(const EpochStats&)>& on_epoch = {});

/// Mean squared error over a sample range, without dropout.
double evaluate_mse(const ModelParams& params, const Dataset& data, SampleRange range,
                    std::size_t batch_size = 256);

inline constexpr double kInfiniteDecodeThreshold = 0.5;

/// Maps a raw network output back to a forward reuse distance: clamp to
/// [-1, 1], unscale on the target column, < 0.5 is infinite, otherwise
/// round to the nearest integer >= 1.
Distance decode_prediction(double raw, const ScalerParams& scaler);

Distance predict_frd(const Checkpoint& checkpoint, std::span<const double> sample);

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// `epoch,train_mse,val_mse` CSV.
void write_history_csv(const std::vector<EpochStats>& history, std::ostream& out);

/// Runs the network once per access. Owns its own activation buffers; use
/// one instance per thread.
class LstmPredictor final : public Predictor {
 public:
  explicit LstmPredictor(const Checkpoint& checkpoint) : checkpoint_(checkpoint) {}
  Distance predict(std::size_t time, std::span<const double> sample) override;

 private:
  const Checkpoint& checkpoint_;
};

/// Online predictions for every access of `trace`, evaluated in batches.
/// Identical inputs to LstmPredictor driven by an OnlineSampler.
std::vector<Distance> precompute_predictions(const Checkpoint& checkpoint, const Trace& trace,
                                             std::size_t batch_size = 256,
                                             std::vector<double>* raw_outputs = nullptr);

}  // namespace fwdrd::rnn
