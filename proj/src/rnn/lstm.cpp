#include <cmath>

#include "fwdrd/random.hpp"
#include "fwdrd/rnn.hpp"

namespace fwdrd::rnn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](const double*, std::size_t count) { n += count; });
  return n;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.sequence_length = sequence_length;
  for (const auto& l : layers)
    z.layers.push_back({MatrixXd::Zero(l.weights.rows(), l.weights.cols()), VectorXd::Zero(l.bias.size())});
  z.dense_w = RowVectorXd::Zero(dense_w.size());
  z.dense_b = 0.0;
  return z;
}

double& ModelParams::at(std::size_t flat_index) {
  double* found = nullptr;
  std::size_t offset = 0;
  for_each_block([&](double* p, std::size_t n) {
    if (!found && flat_index < offset + n) found = p + (flat_index - offset);
    offset += n;
  });
  if (!found) throw Error("parameter index out of range");
  return *found;
}

double ModelParams::at(std::size_t flat_index) const { return const_cast<ModelParams*>(this)->at(flat_index); }

ModelParams init_params(std::size_t width, std::size_t layers, std::size_t sequence_length,
                        std::uint64_t seed, std::size_t input_dim) {
  if (width == 0 || layers == 0 || sequence_length == 0)
    throw Error("init_params: width, layers and sequence_length must be >= 1");
  Rng rng(seed);
  ModelParams p;
  p.sequence_length = sequence_length;
  const auto H = static_cast<Index>(width);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Index>(l == 0 ? input_dim : width);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in + H));
    LstmLayerParams layer{MatrixXd(4 * H, in + H), VectorXd(4 * H)};
    for (Index j = 0; j < layer.weights.cols(); ++j)
      for (Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = rng.uniform(-bound, bound);
    for (Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-bound, bound);
    layer.gate_bias(kForgetGate).array() += 1.0;
    p.layers.push_back(std::move(layer));
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(H));
  p.dense_w = RowVectorXd(H);
  for (Index i = 0; i < H; ++i) p.dense_w(i) = rng.uniform(-bound, bound);
  p.dense_b = rng.uniform(-bound, bound);
  return p;
}

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

template <typename Block>
void sigmoid_inplace(Block&& b) {
  b = (1.0 + (-b.array()).exp()).inverse().matrix();
}

template <typename Block>
void tanh_inplace(Block&& b) {
  b = b.array().tanh().matrix();
}

struct LayerCache {
  MatrixXd x;      // input, after dropout; in x TB
  MatrixXd gates;  // activated i, f, o, g; 4H x TB
  MatrixXd c;      // H x TB
  MatrixXd tanh_c;
  MatrixXd h;
};

void check_batch(const ModelParams& params, const Batch& batch) {
  if (params.layers.empty()) throw Error("model has no layers");
  const auto T = static_cast<Index>(params.sequence_length);
  const Index B = batch.targets.size();
  if (B == 0) throw Error("empty batch");
  if (batch.inputs.cols() != T * B || batch.inputs.rows() != params.layers[0].input_dim())
    throw Error("batch shape does not match the model (expected " +
                std::to_string(params.layers[0].input_dim()) + " x " + std::to_string(T * B) +
                ", got " + std::to_string(batch.inputs.rows()) + " x " +
                std::to_string(batch.inputs.cols()) + ")");
}

RowVectorXd run_forward(const ModelParams& params, const Batch& batch, const DropoutMasks* masks,
                        std::vector<LayerCache>* caches) {
  check_batch(params, batch);
  const auto T = static_cast<Index>(params.sequence_length);
  const Index B = batch.targets.size();
  if (masks && masks->size() + 1 != params.layers.size()) throw Error("dropout mask count mismatch");
  if (caches) caches->assign(params.layers.size(), {});

  MatrixXd layer_out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    const Index H = layer.width();
    const Index in = layer.input_dim();

    MatrixXd x;
    if (l == 0)
      x = batch.inputs;
    else if (masks)
      x = layer_out.cwiseProduct((*masks)[l - 1]);
    else
      x = std::move(layer_out);

    MatrixXd z(4 * H, T * B);
    z.noalias() = layer.weights.leftCols(in) * x;
    z.colwise() += layer.bias;
    MatrixXd c(H, T * B), tanh_c(H, T * B), h(H, T * B);
    for (Index t = 0; t < T; ++t) {
      auto zt = z.middleCols(t * B, B);
      if (t > 0) zt.noalias() += layer.weights.rightCols(H) * h.middleCols((t - 1) * B, B);
      sigmoid_inplace(zt.topRows(3 * H));
      tanh_inplace(zt.bottomRows(H));
      auto ct = c.middleCols(t * B, B);
      ct = zt.middleRows(kInputGate * H, H).cwiseProduct(zt.middleRows(kCandidate * H, H));
      if (t > 0) ct += zt.middleRows(kForgetGate * H, H).cwiseProduct(c.middleCols((t - 1) * B, B));
      tanh_c.middleCols(t * B, B) = ct.array().tanh().matrix();
      h.middleCols(t * B, B) = zt.middleRows(kOutputGate * H, H).cwiseProduct(tanh_c.middleCols(t * B, B));
    }
    layer_out = h;
    if (caches) (*caches)[l] = LayerCache{std::move(x), std::move(z), std::move(c), std::move(tanh_c), std::move(h)};
  }
  RowVectorXd pred = params.dense_w * layer_out.middleCols((T - 1) * B, B);
  pred.array() += params.dense_b;
  return pred;
}

}  // namespace

CellState lstm_cell_forward(const LstmLayerParams& layer, const VectorXd& x, const VectorXd& h_prev,
                            const VectorXd& c_prev) {
  const Index H = layer.width();
  if (x.size() != layer.input_dim() || h_prev.size() != H || c_prev.size() != H)
    throw Error("lstm_cell_forward: dimension mismatch");
  VectorXd xh(x.size() + H);
  xh << x, h_prev;
  const VectorXd i = (layer.gate_weights(kInputGate) * xh + layer.gate_bias(kInputGate)).unaryExpr(&sigmoid);
  const VectorXd f = (layer.gate_weights(kForgetGate) * xh + layer.gate_bias(kForgetGate)).unaryExpr(&sigmoid);
  const VectorXd o = (layer.gate_weights(kOutputGate) * xh + layer.gate_bias(kOutputGate)).unaryExpr(&sigmoid);
  const VectorXd g = (layer.gate_weights(kCandidate) * xh + layer.gate_bias(kCandidate)).array().tanh().matrix();
  CellState s;
  s.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  s.h = o.cwiseProduct(s.c.array().tanh().matrix());
  return s;
}

Batch make_batch(const Dataset& data, std::size_t begin, std::size_t end) {
  if (begin >= end || end > data.size()) throw Error("make_batch: bad sample range");
  const auto B = static_cast<Index>(end - begin);
  const auto T = static_cast<Index>(data.sequence_length);
  const auto D = static_cast<Index>(kFeatureDim);
  Batch batch{MatrixXd(D, T * B), RowVectorXd(B)};
  for (Index b = 0; b < B; ++b) {
    const auto s = data.sample(begin + static_cast<std::size_t>(b));
    for (Index t = 0; t < T; ++t)
      for (Index k = 0; k < D; ++k) batch.inputs(k, t * B + b) = s[static_cast<std::size_t>(t * D + k)];
    batch.targets(b) = data.targets[begin + static_cast<std::size_t>(b)];
  }
  return batch;
}

Batch make_batch(std::span<const std::span<const double>> samples, std::size_t sequence_length,
                 std::span<const double> targets) {
  if (samples.empty()) throw Error("make_batch: no samples");
  if (!targets.empty() && targets.size() != samples.size()) throw Error("make_batch: target count mismatch");
  const auto B = static_cast<Index>(samples.size());
  const auto T = static_cast<Index>(sequence_length);
  if (samples[0].size() % sequence_length != 0) throw Error("make_batch: sample size mismatch");
  const auto D = static_cast<Index>(samples[0].size() / sequence_length);
  Batch batch{MatrixXd(D, T * B), RowVectorXd::Zero(B)};
  for (Index b = 0; b < B; ++b) {
    const auto s = samples[static_cast<std::size_t>(b)];
    if (static_cast<Index>(s.size()) != T * D) throw Error("make_batch: sample size mismatch");
    for (Index t = 0; t < T; ++t)
      for (Index k = 0; k < D; ++k) batch.inputs(k, t * B + b) = s[static_cast<std::size_t>(t * D + k)];
    if (!targets.empty()) batch.targets(b) = targets[static_cast<std::size_t>(b)];
  }
  return batch;
}

RowVectorXd forward(const ModelParams& params, const Batch& batch, const DropoutMasks* masks) {
  return run_forward(params, batch, masks, nullptr);
}

double model_forward(const ModelParams& params, std::span<const double> sample, const DropoutMasks* masks) {
  if (sample.size() != params.sequence_length * static_cast<std::size_t>(params.layers.at(0).input_dim()))
    throw Error("model_forward: sample shape mismatch");
  const std::span<const double> one[] = {sample};
  return run_forward(params, make_batch(one, params.sequence_length), masks, nullptr)(0);
}

double loss(double prediction, double target) {
  const double d = prediction - target;
  return d * d;
}

double batch_loss(const RowVectorXd& predictions, const RowVectorXd& targets) {
  return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

LossAndGradients backward(const ModelParams& params, const Batch& batch, const DropoutMasks* masks) {
  std::vector<LayerCache> caches;
  const RowVectorXd pred = run_forward(params, batch, masks, &caches);
  const auto T = static_cast<Index>(params.sequence_length);
  const Index B = batch.targets.size();

  LossAndGradients out{batch_loss(pred, batch.targets), params.zeros_like()};
  ModelParams& g = out.gradients;

  const RowVectorXd dy = 2.0 * (pred - batch.targets) / static_cast<double>(B);
  const auto& top = caches.back();
  g.dense_w.noalias() = dy * top.h.middleCols((T - 1) * B, B).transpose();
  g.dense_b = dy.sum();

  // Gradient w.r.t. each layer's hidden output sequence, filled from above.
  MatrixXd dh_seq = MatrixXd::Zero(top.h.rows(), T * B);
  dh_seq.middleCols((T - 1) * B, B).noalias() = params.dense_w.transpose() * dy;

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    const auto& cache = caches[l];
    const Index H = layer.width();
    const Index in = layer.input_dim();

    MatrixXd dz(4 * H, T * B);
    MatrixXd dh_rec = MatrixXd::Zero(H, B);
    MatrixXd dc = MatrixXd::Zero(H, B);
    for (Index t = T; t-- > 0;) {
      const auto gates = cache.gates.middleCols(t * B, B);
      const auto i = gates.middleRows(kInputGate * H, H).array();
      const auto f = gates.middleRows(kForgetGate * H, H).array();
      const auto o = gates.middleRows(kOutputGate * H, H).array();
      const auto cand = gates.middleRows(kCandidate * H, H).array();
      const auto tc = cache.tanh_c.middleCols(t * B, B).array();

      const MatrixXd dh = dh_seq.middleCols(t * B, B) + dh_rec;
      dc.array() += dh.array() * o * (1.0 - tc.square());

      auto dzt = dz.middleCols(t * B, B);
      dzt.middleRows(kOutputGate * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();
      dzt.middleRows(kInputGate * H, H) = (dc.array() * cand * i * (1.0 - i)).matrix();
      dzt.middleRows(kCandidate * H, H) = (dc.array() * i * (1.0 - cand.square())).matrix();
      if (t > 0)
        dzt.middleRows(kForgetGate * H, H) =
            (dc.array() * cache.c.middleCols((t - 1) * B, B).array() * f * (1.0 - f)).matrix();
      else
        dzt.middleRows(kForgetGate * H, H).setZero();
      dc.array() *= f;
      if (t > 0) dh_rec.noalias() = layer.weights.rightCols(H).transpose() * dzt;
    }

    auto& gl = g.layers[l];
    gl.weights.leftCols(in).noalias() = dz * cache.x.transpose();
    if (T > 1)
      gl.weights.rightCols(H).noalias() =
          dz.rightCols((T - 1) * B) * cache.h.leftCols((T - 1) * B).transpose();
    gl.bias = dz.rowwise().sum();

    if (l > 0) {
      dh_seq.noalias() = layer.weights.leftCols(in).transpose() * dz;
      if (masks) dh_seq.array() *= (*masks)[l - 1].array();
    }
  }
  return out;
}

DropoutMasks sample_dropout_masks(const ModelParams& params, std::size_t batch_size, double rate,
                                  std::uint64_t seed) {
  DropoutMasks masks;
  if (rate <= 0.0) return masks;
  if (rate >= 1.0) throw Error("dropout rate must be < 1");
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  const auto cols = static_cast<Index>(params.sequence_length * batch_size);
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
    MatrixXd m(params.layers[l].width(), cols);
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform() < rate ? 0.0 : keep_scale;
    masks.push_back(std::move(m));
  }
  return masks;
}

}  // namespace fwdrd::rnn
