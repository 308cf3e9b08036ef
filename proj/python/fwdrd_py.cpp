#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fwdrd/dataset.hpp"
#include "fwdrd/policies.hpp"
#include "fwdrd/rnn.hpp"

namespace py = pybind11;
using namespace fwdrd;

namespace {

template <typename T>
py::array_t<T> to_numpy(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

Trace to_trace(py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> blocks) {
  const auto* p = blocks.data();
  return Trace(std::vector<BlockId>(p, p + blocks.size()));
}

SimResult run_policy(const Trace& t, const std::string& name, std::size_t capacity,
                     const std::optional<std::vector<Distance>>& predictions) {
  const PolicyKind kind = parse_policy(name);
  if (kind != PolicyKind::kPopt) return simulate(t, PolicySpec{kind}, capacity);
  ReplayPredictor p(predictions ? *predictions : forward_rd(t));
  return simulate_popt(t, capacity, p);
}

}  // namespace

PYBIND11_MODULE(_fwdrd, m) {
  m.doc() = "Forward reuse distance features, LSTM training and cache simulation";
  m.attr("INF") = py::int_(kInfinite);

  py::register_exception<Error>(m, "Error");

  py::class_<TraceStats>(m, "TraceStats")
      .def_readonly("length", &TraceStats::length)
      .def_readonly("unique_blocks", &TraceStats::unique_blocks)
      .def_readonly("mean_accesses_per_block", &TraceStats::mean_accesses_per_block)
      .def_readonly("unique_deltas", &TraceStats::unique_deltas)
      .def_readonly("delta_compression_ratio", &TraceStats::delta_compression_ratio);

  m.def("load_trace", [](const std::string& path, const std::string& format, std::uint64_t block_size,
                         bool expand) { return to_numpy(load_trace(path, format, block_size, expand).blocks()); },
        py::arg("path"), py::arg("format") = "plain", py::arg("block_size") = kDefaultBlockSize,
        py::arg("expand") = false);
  m.def("trace_stats", [](py::array_t<std::uint64_t> b) { return trace_stats(to_trace(b)); });

  m.def("backward_rd", [](py::array_t<std::uint64_t> b) { return to_numpy(backward_rd(to_trace(b))); });
  m.def("forward_rd", [](py::array_t<std::uint64_t> b) { return to_numpy(forward_rd(to_trace(b))); });
  m.def("penultimate_rd", [](py::array_t<std::uint64_t> b) {
    const Trace t = to_trace(b);
    return to_numpy(penultimate_rd(t, backward_rd(t)));
  });
  m.def("address_deltas", [](py::array_t<std::uint64_t> b) { return to_numpy(address_deltas(to_trace(b))); });

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("centroids", &ClusterModel::centroids)
      .def_readonly("seed", &ClusterModel::seed)
      .def("assign", &ClusterModel::assign);
  m.def("kmeans", [](const std::vector<std::int64_t>& d, std::size_t k, std::uint64_t seed) { return kmeans(d, k, seed); },
        py::arg("deltas"), py::arg("k"), py::arg("seed") = 42);
  m.def("auto_partition",
        [](const std::vector<std::int64_t>& d, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
          auto r = auto_partition(d, k_min, k_max, seed);
          return py::make_tuple(r.model, r.cv_by_k);
        },
        py::arg("deltas"), py::arg("k_min") = 2, py::arg("k_max") = 16, py::arg("seed") = 42);

  // (n, 6) raw features with infinite distances written as 0.
  m.def("feature_matrix",
        [](py::array_t<std::uint64_t> b, std::size_t k_avg, std::size_t k_freq, std::size_t k_clusters,
           std::uint64_t seed) {
          const Trace t = to_trace(b);
          const ClusterModel cm = kmeans(address_deltas(t), k_clusters, seed);
          const auto rows = build_feature_matrix(t, cm, {k_avg, k_freq});
          py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(kFeatureDim)});
          auto w = out.mutable_unchecked<2>();
          for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto e = rows[i].encode();
            for (std::size_t k = 0; k < kFeatureDim; ++k) w(i, k) = e[k];
          }
          return out;
        },
        py::arg("blocks"), py::arg("k_avg") = kDefaultAvgWindow, py::arg("k_freq") = kDefaultFreqWindow,
        py::arg("k_clusters") = 1, py::arg("seed") = 42);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("sequence_length", &Dataset::sequence_length)
      .def("__len__", &Dataset::size)
      .def_property_readonly("features",
                             [](const Dataset& d) {
                               py::array_t<float> a({static_cast<py::ssize_t>(d.size()),
                                                     static_cast<py::ssize_t>(d.sequence_length),
                                                     static_cast<py::ssize_t>(kFeatureDim)});
                               std::copy(d.features.begin(), d.features.end(), a.mutable_data());
                               return a;
                             })
      .def_property_readonly("targets", [](const Dataset& d) { return to_numpy(d.targets); })
      .def_property_readonly("origins", [](const Dataset& d) { return to_numpy(d.origins); })
      .def("save", [](const Dataset& d, const std::string& path) { save(d, path); });
  m.def("prepare_dataset",
        [](py::array_t<std::uint64_t> b, std::size_t sequence_length, std::size_t k_avg, std::size_t k_freq,
           std::uint64_t seed) {
          PrepareOptions o;
          o.sequence_length = sequence_length;
          o.features = {k_avg, k_freq};
          o.seed = seed;
          return prepare_dataset(to_trace(b), o);
        },
        py::arg("blocks"), py::arg("sequence_length") = 64, py::arg("k_avg") = kDefaultAvgWindow,
        py::arg("k_freq") = kDefaultFreqWindow, py::arg("seed") = 42);
  m.def("load_dataset", &load_dataset);

  py::class_<rnn::Checkpoint>(m, "Checkpoint")
      .def_property_readonly("best_epoch", [](const rnn::Checkpoint& c) { return c.best_epoch; })
      .def_property_readonly("history",
                             [](const rnn::Checkpoint& c) {
                               py::list out;
                               for (const auto& e : c.history) out.append(py::make_tuple(e.epoch, e.train_mse, e.val_mse));
                               return out;
                             })
      .def("save", [](const rnn::Checkpoint& c, const std::string& path) { rnn::save_checkpoint(c, path); })
      .def("predict", [](const rnn::Checkpoint& c, py::array_t<std::uint64_t> b) {
        return to_numpy(rnn::precompute_predictions(c, to_trace(b)));
      });
  m.def("load_checkpoint", &rnn::load_checkpoint);
  m.def("train",
        [](const Dataset& d, std::size_t train_take, std::size_t val_take, std::size_t epochs, std::size_t width,
           std::size_t layers, double learning_rate, double dropout, std::size_t batch_size, std::size_t patience,
           std::uint64_t seed) {
          rnn::TrainConfig c;
          c.epochs = epochs;
          c.width = width;
          c.layers = layers;
          c.learning_rate = learning_rate;
          c.dropout = dropout;
          c.batch_size = batch_size;
          c.patience = patience;
          c.seed = seed;
          const std::size_t pool = static_cast<std::size_t>(d.train_ratio * static_cast<double>(d.size()));
          const Split s = split(d, d.train_ratio, train_take ? train_take : pool, val_take ? val_take : d.size() - pool);
          py::gil_scoped_release release;
          return rnn::train(d, s, c);
        },
        py::arg("dataset"), py::arg("train_take") = 0, py::arg("val_take") = 0, py::arg("epochs") = 1000,
        py::arg("width") = 256, py::arg("layers") = 2, py::arg("learning_rate") = 0.001, py::arg("dropout") = 0.2,
        py::arg("batch_size") = 32, py::arg("patience") = 20, py::arg("seed") = 42);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("policy", &SimResult::policy)
      .def_readonly("cache_size", &SimResult::cache_size)
      .def_readonly("accesses", &SimResult::accesses)
      .def_readonly("misses", &SimResult::misses)
      .def_readonly("miss_ratio", &SimResult::miss_ratio)
      .def("__repr__", [](const SimResult& r) {
        return "SimResult(" + r.policy + ", C=" + std::to_string(r.cache_size) + ", misses=" + std::to_string(r.misses) + ")";
      });
  // pOPT replays `predictions` (one per access); without them it uses the exact forward distances.
  m.def("simulate",
        [](py::array_t<std::uint64_t> b, const std::string& policy, std::size_t capacity,
           std::optional<std::vector<Distance>> predictions) {
          return run_policy(to_trace(b), policy, capacity, predictions);
        },
        py::arg("blocks"), py::arg("policy"), py::arg("capacity"), py::arg("predictions") = py::none());
  m.def("brute_force_min_misses", [](py::array_t<std::uint64_t> b, std::size_t c) {
    return brute_force_min_misses(to_trace(b), c);
  });
}
