#include <cmath>
#include <ostream>

#include "fwdrd/random.hpp"
#include "fwdrd/rnn.hpp"

namespace fwdrd::rnn {

void TrainConfig::validate() const {
  if (epochs == 0) throw Error("epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("learning_rate must be >= 0");
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must be in [0, 1)");
  if (width == 0 || layers == 0) throw Error("width and layers must be >= 1");
  if (!(clip_norm > 0.0)) throw Error("clip_norm must be positive");
}

double evaluate_mse(const ModelParams& params, const Dataset& data, SampleRange range,
                    std::size_t batch_size) {
  if (range.size() == 0) throw Error("evaluate_mse: empty range");
  double sum = 0.0;
  for (std::size_t b = range.begin; b < range.end; b += batch_size) {
    const std::size_t e = std::min(b + batch_size, range.end);
    const Batch batch = make_batch(data, b, e);
    sum += (forward(params, batch) - batch.targets).squaredNorm();
  }
  return sum / static_cast<double>(range.size());
}

namespace {

/// Adam over the flat parameter vector in for_each_block order.
class Adam {
 public:
  Adam(const TrainConfig& c, std::size_t n) : c_(c), m_(n, 0.0), v_(n, 0.0) {}

  void step(ModelParams& params, const ModelParams& grads) {
    ++t_;
    const double corr1 = 1.0 - std::pow(c_.adam_beta1, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(c_.adam_beta2, static_cast<double>(t_));
    std::vector<const double*> gblocks;
    grads.for_each_block([&](const double* g, std::size_t) { gblocks.push_back(g); });
    std::size_t block = 0, offset = 0;
    params.for_each_block([&](double* p, std::size_t n) {
      const double* g = gblocks[block++];
      for (std::size_t j = 0; j < n; ++j) {
        double& m = m_[offset + j];
        double& v = v_[offset + j];
        m = c_.adam_beta1 * m + (1.0 - c_.adam_beta1) * g[j];
        v = c_.adam_beta2 * v + (1.0 - c_.adam_beta2) * g[j] * g[j];
        p[j] -= c_.learning_rate * (m / corr1) / (std::sqrt(v / corr2) + c_.adam_epsilon);
      }
      offset += n;
    });
  }

 private:
  const TrainConfig& c_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

void clip_gradients(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  grads.for_each_block([&](const double* g, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) sq += g[j] * g[j];
  });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double s = max_norm / norm;
  grads.for_each_block([&](double* g, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) g[j] *= s;
  });
}

}  // namespace

Checkpoint train(const Dataset& data, const Split& split, const TrainConfig& config,
                 const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (split.train.size() == 0) throw TrainingError("empty training split");
  if (split.validation.size() == 0) throw TrainingError("empty validation split");
  if (split.train.end > data.size() || split.validation.end > data.size())
    throw TrainingError("split exceeds dataset");

  Checkpoint ck;
  ck.params = init_params(config.width, config.layers, data.sequence_length, config.seed);
  ck.scaler = data.scaler;
  ck.clusters = data.clusters;
  ck.feature_options = data.feature_options;
  ck.config = config;

  std::vector<Batch> batches;
  for (std::size_t b = split.train.begin; b < split.train.end; b += config.batch_size)
    batches.push_back(make_batch(data, b, std::min(b + config.batch_size, split.train.end)));

  ModelParams& params = ck.params;
  ModelParams best = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  Adam adam(config, params.parameter_count());
  Rng mask_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const bool use_dropout = config.dropout > 0.0 && config.layers > 1;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double sum = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      DropoutMasks masks;
      if (use_dropout) masks = sample_dropout_masks(params, batch.size(), config.dropout, mask_rng.next());
      LossAndGradients lg = backward(params, batch, use_dropout ? &masks : nullptr);
      if (!std::isfinite(lg.loss))
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(bi));
      sum += lg.loss * static_cast<double>(batch.size());
      clip_gradients(lg.gradients, config.clip_norm);
      adam.step(params, lg.gradients);
    }

    EpochStats stats{epoch, sum / static_cast<double>(split.train.size()),
                     evaluate_mse(params, data, split.validation)};
    if (!std::isfinite(stats.val_mse))
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    ck.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (stats.val_mse < best_val - config.min_delta || epoch == 1) {
      best_val = stats.val_mse;
      best = params;
      ck.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  params = std::move(best);
  return ck;
}

void write_history_csv(const std::vector<EpochStats>& history, std::ostream& out) {
  out << "epoch,train_mse,val_mse\n";
  out.precision(17);
  for (const auto& h : history) out << h.epoch << ',' << h.train_mse << ',' << h.val_mse << '\n';
}

}  // namespace fwdrd::rnn
