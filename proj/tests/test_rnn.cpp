#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fwdrd/rnn.hpp"
#include "oracles.hpp"

using namespace fwdrd;
using namespace fwdrd::rnn;
using Eigen::VectorXd;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Element-wise reference cell.
CellState reference_cell(const LstmLayerParams& p, const VectorXd& x, const VectorXd& h,
                         const VectorXd& c) {
  const Eigen::Index H = p.width(), D = p.input_dim();
  std::vector<double> concat(D + H);
  for (Eigen::Index k = 0; k < D; ++k) concat[k] = x[k];
  for (Eigen::Index k = 0; k < H; ++k) concat[D + k] = h[k];
  CellState out{VectorXd(H), VectorXd(H)};
  for (Eigen::Index j = 0; j < H; ++j) {
    double z[4];
    for (int g = 0; g < 4; ++g) {
      z[g] = p.bias[g * H + j];
      for (Eigen::Index k = 0; k < D + H; ++k) z[g] += p.weights(g * H + j, k) * concat[k];
    }
    const double i = sigmoid(z[kInputGate]), f = sigmoid(z[kForgetGate]), o = sigmoid(z[kOutputGate]);
    const double cand = std::tanh(z[kCandidate]);
    out.c[j] = f * c[j] + i * cand;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

std::vector<double> random_sample(Rng& rng, std::size_t L, std::size_t D = kFeatureDim) {
  std::vector<double> s(L * D);
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return s;
}

Batch random_batch(Rng& rng, std::size_t B, std::size_t L, std::size_t D = kFeatureDim) {
  std::vector<std::vector<double>> raw;
  std::vector<std::span<const double>> views;
  std::vector<double> targets;
  for (std::size_t b = 0; b < B; ++b) {
    raw.push_back(random_sample(rng, L, D));
    targets.push_back(rng.uniform(-1.0, 1.0));
  }
  for (const auto& r : raw) views.emplace_back(r);
  return make_batch(views, L, targets);
}

Dataset small_dataset(std::uint64_t seed, std::size_t n = 300, std::size_t L = 6) {
  Rng rng(seed);
  const Trace t = oracle::random_trace(rng, n, 12);
  PrepareOptions opts;
  opts.sequence_length = L;
  opts.k_min = 2;
  opts.k_max = 3;
  return prepare_dataset(t, opts);
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.width = 6;
  c.layers = 2;
  c.epochs = 4;
  c.batch_size = 16;
  c.patience = 0;
  c.learning_rate = 0.01;
  return c;
}

}  // namespace

TEST_CASE("cell with zero parameters") {
  LstmLayerParams p{Eigen::MatrixXd::Zero(8, 3 + 2), VectorXd::Zero(8)};
  const VectorXd x = VectorXd::Constant(3, 0.7);
  CellState s = lstm_cell_forward(p, x, VectorXd::Zero(2), VectorXd::Zero(2));
  CHECK(s.h.isZero(0));
  CHECK(s.c.isZero(0));
  s = lstm_cell_forward(p, x, VectorXd::Zero(2), VectorXd::Constant(2, 2.0));
  CHECK(s.c[0] == doctest::Approx(1.0));
  CHECK(s.h[1] == doctest::Approx(0.5 * std::tanh(1.0)));
}

TEST_CASE("cell matches an element-wise reference") {
  const ModelParams m = init_params(2, 1, 1, 42);
  CHECK(m.layers[0].gate_bias(kForgetGate).minCoeff() > 0.0);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x(6), h(2), c(2);
    for (auto* v : {&x, &h, &c})
      for (Eigen::Index k = 0; k < v->size(); ++k) (*v)[k] = rng.uniform(-2.0, 2.0);
    const CellState got = lstm_cell_forward(m.layers[0], x, h, c);
    const CellState want = reference_cell(m.layers[0], x, h, c);
    CHECK((got.h - want.h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((got.c - want.c).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("model forward equals chained cells") {
  Rng rng(3);
  const std::size_t L = 5;
  const ModelParams m = init_params(4, 3, L, 17);
  const auto sample = random_sample(rng, L);
  std::vector<CellState> state(3, CellState{VectorXd::Zero(4), VectorXd::Zero(4)});
  for (std::size_t t = 0; t < L; ++t) {
    VectorXd x = Eigen::Map<const VectorXd>(sample.data() + t * kFeatureDim, kFeatureDim);
    for (std::size_t l = 0; l < 3; ++l) {
      state[l] = reference_cell(m.layers[l], x, state[l].h, state[l].c);
      x = state[l].h;
    }
  }
  const double want = m.dense_w.dot(state[2].h) + m.dense_b;
  CHECK(model_forward(m, sample) == doctest::Approx(want).epsilon(1e-12));

  // Batched evaluation agrees with single-sample evaluation.
  const Batch b = random_batch(rng, 7, L);
  const Eigen::RowVectorXd y = forward(m, b);
  for (Eigen::Index i = 0; i < 7; ++i) {
    std::vector<double> s(L * kFeatureDim);
    for (std::size_t t = 0; t < L; ++t)
      for (std::size_t k = 0; k < kFeatureDim; ++k) s[t * kFeatureDim + k] = b.inputs(k, t * 7 + i);
    CHECK(y[i] == doctest::Approx(model_forward(m, s)).epsilon(1e-12));
  }
}

TEST_CASE("model forward basics") {
  ModelParams zero = init_params(3, 2, 4, 1).zeros_like();
  zero.dense_b = 0.25;
  Rng rng(5);
  CHECK(model_forward(zero, random_sample(rng, 4)) == 0.25);

  const ModelParams m = init_params(8, 2, 4, 2);
  auto s = random_sample(rng, 4);
  const double before = model_forward(m, s);
  std::swap_ranges(s.begin(), s.begin() + kFeatureDim, s.begin() + 2 * kFeatureDim);
  CHECK(model_forward(m, s) != before);

  const ModelParams one = init_params(5, 1, 1, 8);
  CHECK(std::isfinite(model_forward(one, random_sample(rng, 1))));
  CHECK(one.parameter_count() == 4 * 5 * (6 + 5) + 4 * 5 + 5 + 1);
}

TEST_CASE("loss") {
  CHECK(loss(0.5, 0.5) == 0.0);
  CHECK(loss(1.0, -1.0) == 4.0);
  Eigen::RowVectorXd p(2), t(2);
  p << 0.0, 1.0;
  t << 1.0, 1.0;
  CHECK(batch_loss(p, t) == 0.5);
}

namespace {

void gradient_check(const ModelParams& m, const Batch& b, const DropoutMasks* masks) {
  const LossAndGradients lg = backward(m, b, masks);
  CHECK(lg.loss == doctest::Approx(batch_loss(forward(m, b, masks), b.targets)).epsilon(1e-12));
  ModelParams probe = m;
  ModelParams grads = lg.gradients;
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    const double orig = probe.at(i);
    probe.at(i) = orig + eps;
    const double up = batch_loss(forward(probe, b, masks), b.targets);
    probe.at(i) = orig - eps;
    const double down = batch_loss(forward(probe, b, masks), b.targets);
    probe.at(i) = orig;
    const double numeric = (up - down) / (2 * eps);
    const double analytic = grads.at(i);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  CHECK(worst < 1e-4);
}

}  // namespace

TEST_CASE("gradients match finite differences") {
  Rng rng(21);
  const ModelParams m = init_params(3, 2, 4, 5);
  const Batch b = random_batch(rng, 3, 4);
  SUBCASE("no dropout") { gradient_check(m, b, nullptr); }
  SUBCASE("fixed dropout masks") {
    const DropoutMasks masks = sample_dropout_masks(m, 3, 0.3, 77);
    REQUIRE(masks.size() == 1);
    gradient_check(m, b, &masks);
  }
  SUBCASE("three layers, longer sequence") {
    const ModelParams deep = init_params(2, 3, 7, 6);
    gradient_check(deep, random_batch(rng, 2, 7), nullptr);
  }
}

TEST_CASE("dense bias gradient and zero-loss batches") {
  Rng rng(4);
  const ModelParams m = init_params(4, 2, 3, 9);
  Batch b = random_batch(rng, 5, 3);
  const Eigen::RowVectorXd y = forward(m, b);
  const LossAndGradients lg = backward(m, b);
  CHECK(lg.gradients.dense_b == doctest::Approx((2.0 * (y - b.targets)).mean()).epsilon(1e-12));

  b.targets = y;
  const LossAndGradients zero = backward(m, b);
  CHECK(zero.loss == 0.0);
  bool all_zero = true;
  zero.gradients.for_each_block([&](const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) all_zero = all_zero && p[i] == 0.0;
  });
  CHECK(all_zero);
}

TEST_CASE("gradient steps on a fixed batch do not increase the loss") {
  Rng rng(8);
  ModelParams m = init_params(5, 2, 4, 3);
  const Batch b = random_batch(rng, 8, 4);
  double prev = backward(m, b).loss;
  for (int step = 0; step < 10; ++step) {
    const LossAndGradients lg = backward(m, b);
    for (std::size_t i = 0; i < m.parameter_count(); ++i)
      m.at(i) -= 0.05 * lg.gradients.at(i);
    const double now = batch_loss(forward(m, b), b.targets);
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("training") {
  const Dataset d = small_dataset(1);
  const Split s = split(d, 0.8, 64, 32);

  SUBCASE("zero learning rate keeps the initial parameters") {
    TrainConfig c = tiny_config();
    c.learning_rate = 0.0;
    const Checkpoint ck = train(d, s, c);
    CHECK(ck.params == init_params(c.width, c.layers, d.sequence_length, c.seed));
  }
  SUBCASE("same seed, same bytes") {
    std::vector<EpochStats> seen;
    const Checkpoint a = train(d, s, tiny_config(), [&](const EpochStats& e) { seen.push_back(e); });
    const Checkpoint b = train(d, s, tiny_config());
    CHECK(serialize(a) == serialize(b));
    CHECK(seen == a.history);
    CHECK(a.history.size() == 4);
    CHECK(a.best_epoch >= 1);
    CHECK(evaluate_mse(a.params, d, s.validation) ==
          doctest::Approx(a.history[a.best_epoch - 1].val_mse).epsilon(1e-9));
    TrainConfig other = tiny_config();
    other.seed = 43;
    CHECK(serialize(train(d, s, other)) != serialize(a));
  }
  SUBCASE("early stopping") {
    TrainConfig c = tiny_config();
    c.epochs = 50;
    c.patience = 2;
    c.min_delta = 1.0;  // nothing counts as an improvement after epoch 1
    const Checkpoint ck = train(d, s, c);
    CHECK(ck.history.size() == 3);
    CHECK(ck.best_epoch == 1);
  }
  SUBCASE("non-finite loss aborts") {
    Dataset bad = d;
    bad.features[s.train.begin * bad.sample_stride()] = std::nanf("");
    CHECK_THROWS_AS(train(bad, s, tiny_config()), TrainingError);
  }
  SUBCASE("invalid configuration") {
    TrainConfig c = tiny_config();
    c.batch_size = 0;
    CHECK_THROWS(train(d, s, c));
    c = tiny_config();
    c.dropout = 1.0;
    CHECK_THROWS(train(d, s, c));
  }
}

TEST_CASE("decoding network outputs") {
  ScalerParams sc;
  sc.min[kTargetDim] = 0.0;
  sc.max[kTargetDim] = 10.0;
  const auto raw_for = [&](double v) { return v / 5.0 - 1.0; };
  CHECK(decode_prediction(raw_for(2.4), sc) == 2);
  CHECK(decode_prediction(raw_for(2.6), sc) == 3);
  CHECK(decode_prediction(raw_for(0.49), sc) == kInfinite);
  CHECK(decode_prediction(raw_for(0.51), sc) == 1);
  CHECK(decode_prediction(-1.0, sc) == kInfinite);
  CHECK(decode_prediction(5.0, sc) == 10);
  CHECK(decode_prediction(std::nan(""), sc) == kInfinite);
}

TEST_CASE("checkpoint round trip and inference") {
  const Dataset d = small_dataset(2, 250, 5);
  const Checkpoint ck = train(d, split(d, 0.8, 48, 24), tiny_config());
  const auto bytes = serialize(ck);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back == ck);

  auto cut = bytes;
  cut.resize(cut.size() - 3);
  CHECK_THROWS_AS(deserialize_checkpoint(cut), FormatError);
  auto flipped = bytes;
  flipped[bytes.size() / 3] ^= 1;
  CHECK_THROWS_AS(deserialize_checkpoint(flipped), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(serialize(d)), FormatError);

  Rng rng(2);
  const Trace t = oracle::random_trace(rng, 250, 12);
  std::vector<double> raw;
  const auto batched = precompute_predictions(back, t, 64, &raw);
  REQUIRE(batched.size() == t.size());
  OnlineSampler sampler(ck.sequence_length(), ck.feature_options, ck.clusters, ck.scaler);
  LstmPredictor a(ck), b(back);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto s = sampler.step(t[i]);
    const Distance pa = a.predict(i, s);
    REQUIRE(pa == b.predict(i, s));
    REQUIRE(pa == batched[i]);
    REQUIRE(model_forward(ck.params, s) == doctest::Approx(raw[i]).epsilon(1e-12));
  }
  // Every stored sample decodes the same way through the dataset path.
  for (std::size_t i = 0; i < d.size(); i += 17) {
    std::vector<double> s(d.sample(i).begin(), d.sample(i).end());
    CHECK(predict_frd(ck, s) == decode_prediction(model_forward(ck.params, s), ck.scaler));
  }

  std::ostringstream csv;
  write_history_csv(ck.history, csv);
  CHECK(csv.str().rfind("epoch,train_mse,val_mse\n1,", 0) == 0);
}
