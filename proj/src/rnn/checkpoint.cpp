#include <algorithm>
#include <cmath>

#include "fwdrd/binary_io.hpp"
#include "fwdrd/rnn.hpp"

namespace fwdrd::rnn {

Distance decode_prediction(double raw, const ScalerParams& scaler) {
  const double clamped = std::clamp(std::isfinite(raw) ? raw : -1.0, -1.0, 1.0);
  const double value = scaler.unscale(clamped, kTargetDim);
  if (value < kInfiniteDecodeThreshold) return kInfinite;
  return std::max<Distance>(1, static_cast<Distance>(std::llround(value)));
}

Distance predict_frd(const Checkpoint& checkpoint, std::span<const double> sample) {
  return decode_prediction(model_forward(checkpoint.params, sample), checkpoint.scaler);
}

Distance LstmPredictor::predict(std::size_t, std::span<const double> sample) {
  return predict_frd(checkpoint_, sample);
}

std::vector<Distance> precompute_predictions(const Checkpoint& checkpoint, const Trace& trace,
                                             std::size_t batch_size, std::vector<double>* raw_outputs) {
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  OnlineSampler sampler(checkpoint.sequence_length(), checkpoint.feature_options, checkpoint.clusters,
                        checkpoint.scaler);
  std::vector<Distance> out;
  out.reserve(trace.size());
  if (raw_outputs) raw_outputs->clear();

  std::vector<std::vector<double>> pending;
  auto flush = [&] {
    if (pending.empty()) return;
    std::vector<std::span<const double>> views(pending.begin(), pending.end());
    const Eigen::RowVectorXd raw =
        forward(checkpoint.params, make_batch(views, checkpoint.sequence_length()));
    for (Eigen::Index b = 0; b < raw.size(); ++b) {
      out.push_back(decode_prediction(raw(b), checkpoint.scaler));
      if (raw_outputs) raw_outputs->push_back(raw(b));
    }
    pending.clear();
  };
  for (BlockId block : trace.blocks()) {
    const auto s = sampler.step(block);
    pending.emplace_back(s.begin(), s.end());
    if (pending.size() == batch_size) flush();
  }
  flush();
  return out;
}

namespace {

void write_config(binio::Writer& w, const TrainConfig& c) {
  w.put<std::uint64_t>(c.epochs);
  w.put<double>(c.learning_rate);
  w.put<std::uint64_t>(c.batch_size);
  w.put<double>(c.dropout);
  w.put<std::uint64_t>(c.seed);
  w.put<std::uint64_t>(c.patience);
  w.put<double>(c.min_delta);
  w.put<std::uint64_t>(c.width);
  w.put<std::uint64_t>(c.layers);
  w.put<double>(c.clip_norm);
  w.put<double>(c.adam_beta1);
  w.put<double>(c.adam_beta2);
  w.put<double>(c.adam_epsilon);
}

TrainConfig read_config(binio::Reader& r) {
  TrainConfig c;
  c.epochs = r.get<std::uint64_t>();
  c.learning_rate = r.get<double>();
  c.batch_size = r.get<std::uint64_t>();
  c.dropout = r.get<double>();
  c.seed = r.get<std::uint64_t>();
  c.patience = r.get<std::uint64_t>();
  c.min_delta = r.get<double>();
  c.width = r.get<std::uint64_t>();
  c.layers = r.get<std::uint64_t>();
  c.clip_norm = r.get<double>();
  c.adam_beta1 = r.get<double>();
  c.adam_beta2 = r.get<double>();
  c.adam_epsilon = r.get<double>();
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ck) {
  binio::Writer w;
  w.put_magic("RLCK");
  w.put<std::uint16_t>(kCheckpointVersion);
  write_config(w, ck.config);
  const ModelParams& p = ck.params;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.sequence_length));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.layers.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.width()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.layers.empty() ? 0 : p.layers[0].input_dim()));
  p.for_each_block([&](const double* data, std::size_t n) { w.put_array<double>({data, n}); });
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ck.feature_options.k_avg));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ck.feature_options.k_freq));
  write_scaler(w, ck.scaler);
  write_clusters(w, ck.clusters);
  w.put<std::uint64_t>(ck.best_epoch);
  w.put<std::uint64_t>(ck.history.size());
  for (const auto& h : ck.history) {
    w.put<std::uint64_t>(h.epoch);
    w.put<double>(h.train_mse);
    w.put<double>(h.val_mse);
  }
  w.seal();
  return std::move(w).take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  binio::Reader r = binio::open_container(bytes, "RLCK", kCheckpointVersion);
  Checkpoint ck;
  ck.config = read_config(r);
  const auto seq_len = r.get<std::uint32_t>();
  const auto layers = r.get<std::uint32_t>();
  const auto width = r.get<std::uint32_t>();
  const auto input_dim = r.get<std::uint32_t>();
  if (layers == 0 || width == 0 || seq_len == 0 || input_dim == 0) throw FormatError("bad model shape");
  const std::size_t expected =
      4ull * width * (input_dim + width) + 4ull * width +
      (layers - 1ull) * (4ull * width * (2ull * width) + 4ull * width) + width + 1;
  if (expected > r.remaining() / sizeof(double)) throw FormatError("model shape exceeds file size");
  ck.params = init_params(width, layers, seq_len, 0, input_dim);
  ck.params.for_each_block([&](double* data, std::size_t n) { r.get_array<double>({data, n}); });
  ck.feature_options.k_avg = r.get<std::uint32_t>();
  ck.feature_options.k_freq = r.get<std::uint32_t>();
  ck.scaler = read_scaler(r);
  ck.clusters = read_clusters(r);
  ck.best_epoch = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  if (n > r.remaining() / 24) throw FormatError("history length exceeds file size");
  ck.history.resize(n);
  for (auto& h : ck.history) {
    h.epoch = r.get<std::uint64_t>();
    h.train_mse = r.get<double>();
    h.val_mse = r.get<double>();
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  binio::write_file(path, serialize(ck));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(binio::read_file(path));
}

}  // namespace fwdrd::rnn
