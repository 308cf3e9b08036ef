#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fwdrd/dataset.hpp"
#include "fwdrd/locality.hpp"
#include "fwdrd/plot.hpp"
#include "fwdrd/policies.hpp"
#include "fwdrd/rnn.hpp"

namespace fwdrd::cli {

namespace {

Trace load(const RunConfig& c) {
  if (c.trace.empty()) throw ConfigError("no trace configured (set trace=PATH or --trace)");
  return load_trace(c.trace, c.format, c.block_size, c.expand_multiblock);
}

std::ofstream open_out(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  std::ofstream out(c.out_path(name), std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + c.out_path(name));
  return out;
}

void finish(std::ofstream& out, const std::string& what) {
  out.flush();
  if (!out) throw IoError("failed writing " + what);
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_stats_csv(const TraceStats& s, std::ostream& out) {
  out << "length,unique_blocks,mean_accesses_per_block,unique_deltas,delta_compression_ratio\n";
  out << s.length << ',' << s.unique_blocks << ',' << fmt(s.mean_accesses_per_block, "%.17g") << ','
      << s.unique_deltas << ',' << fmt(s.delta_compression_ratio, "%.17g") << '\n';
}

TraceStats read_stats_csv(std::istream& in) {
  std::string header, row;
  if (!std::getline(in, header) || !std::getline(in, row)) throw ParseError("stats CSV too short", 0);
  std::stringstream ss(row);
  std::string f[5];
  for (auto& x : f)
    if (!std::getline(ss, x, ',')) throw ParseError("expected 5 fields", 2);
  TraceStats s;
  s.length = std::stoull(f[0]);
  s.unique_blocks = std::stoull(f[1]);
  s.mean_accesses_per_block = std::stod(f[2]);
  s.unique_deltas = std::stoull(f[3]);
  s.delta_compression_ratio = std::stod(f[4]);
  return s;
}

std::vector<std::size_t> default_sizes(const Trace& trace) {
  const std::unordered_set<BlockId> distinct(trace.blocks().begin(), trace.blocks().end());
  const auto u = static_cast<double>(distinct.size());
  std::vector<std::size_t> sizes;
  for (int shift = 6; shift >= 0; --shift) {
    const auto s = std::max<std::size_t>(TwoQCache::kMinCapacity,
                                         static_cast<std::size_t>(std::llround(u / std::ldexp(1.0, shift))));
    if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
  }
  return sizes;
}

void cmd_stats(const RunConfig& c, std::ostream& log) {
  const TraceStats s = trace_stats(load(c));
  log << "length                   " << s.length << '\n'
      << "unique blocks            " << s.unique_blocks << '\n'
      << "accesses per block       " << fmt(s.mean_accesses_per_block, "%.2f") << '\n'
      << "unique address deltas    " << s.unique_deltas << '\n'
      << "delta compression ratio  " << fmt(100.0 * s.delta_compression_ratio, "%+.2f") << "%\n";
  auto out = open_out(c, "stats.csv");
  write_stats_csv(s, out);
  finish(out, "stats.csv");
}

void cmd_patterns(const RunConfig& c, std::ostream& log) {
  const Trace trace = load(c);
  auto csv = open_out(c, "rd_timeseries.csv");
  const std::size_t rows = export_rd_timeseries(trace, csv);
  finish(csv, "rd_timeseries.csv");
  log << "wrote " << rows << " rows to " << c.out_path("rd_timeseries.csv") << '\n';
  if (c.svg) {
    const RdSeries rd = backward_rd(trace);
    std::vector<std::pair<double, double>> points;
    points.reserve(rd.size());
    for (std::size_t t = 0; t < rd.size(); ++t) points.emplace_back(static_cast<double>(t), encode_distance(rd[t]));
    auto svg = open_out(c, "rd_scatter.svg");
    plot::write_scatter_svg(points, svg, "Reuse distance over time (0 = infinite)", "logical time",
                            "reuse distance");
    finish(svg, "rd_scatter.svg");
  }
}

void cmd_prepare(const RunConfig& c, std::ostream& log) {
  const Trace trace = load(c);
  PrepareOptions opt;
  opt.features = {c.k_avg, c.k_freq};
  opt.sequence_length = c.sequence_length;
  opt.k_min = c.k_min;
  opt.k_max = c.k_max;
  opt.seed = c.seed;
  opt.train_ratio = c.train_ratio;
  if (c.sequence_length > trace.size())
    throw ConfigError("sequence_length " + std::to_string(c.sequence_length) + " exceeds trace length " +
                      std::to_string(trace.size()));
  const Dataset d = prepare_dataset(trace, opt);
  std::filesystem::create_directories(c.out);
  save(d, c.out_path("dataset.rlds"));
  if (c.debug_csv) {
    auto out = open_out(c, "dataset_debug.csv");
    export_debug_csv(d, out);
    finish(out, "dataset_debug.csv");
  }
  log << "samples " << d.size() << ", sequence_length " << d.sequence_length << ", clusters "
      << d.clusters.k() << " -> " << c.out_path("dataset.rlds") << '\n';
}

void cmd_train(const RunConfig& c, std::ostream& log) {
  const Dataset d = load_dataset(c.dataset_path());
  const std::size_t pool = static_cast<std::size_t>(std::floor(c.train_ratio * static_cast<double>(d.size())));
  const Split s = split(d, c.train_ratio, c.train_take ? c.train_take : pool,
                        c.val_take ? c.val_take : d.size() - pool);
  log << "training on " << s.train.size() << " samples, validating on " << s.validation.size() << '\n';
  const rnn::Checkpoint ck = rnn::train(d, s, c.train, [&](const rnn::EpochStats& e) {
    log << "epoch " << e.epoch << " train_mse " << fmt(e.train_mse, "%.6f") << " val_mse "
        << fmt(e.val_mse, "%.6f") << '\n';
  });
  std::filesystem::create_directories(c.out);
  rnn::save_checkpoint(ck, c.out_path("checkpoint.rlck"));
  auto out = open_out(c, "train_log.csv");
  rnn::write_history_csv(ck.history, out);
  finish(out, "train_log.csv");
  log << "best epoch " << ck.best_epoch << " -> " << c.out_path("checkpoint.rlck") << '\n';
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  const Trace trace = load(c);
  const std::vector<std::size_t> sizes = c.sizes.empty() ? default_sizes(trace) : c.sizes;
  if (sizes.empty()) throw ConfigError("no cache sizes");

  std::unique_ptr<rnn::Checkpoint> checkpoint;
  std::vector<std::unique_ptr<Predictor>> predictors;
  std::vector<Mrc> curves;
  std::vector<SimResult> rows;
  for (const auto& name : c.policies) {
    PolicySpec spec;
    if (name == "popt-oracle") {
      spec.kind = PolicyKind::kPopt;
      spec.label = "pOPT-oracle";
      predictors.push_back(std::make_unique<ReplayPredictor>(forward_rd(trace)));
      spec.predictor = predictors.back().get();
    } else {
      spec.kind = parse_policy(name);
      if (spec.kind == PolicyKind::kPopt) {
        if (!checkpoint) checkpoint = std::make_unique<rnn::Checkpoint>(rnn::load_checkpoint(c.checkpoint_path()));
        log << "predicting forward reuse distances for " << trace.size() << " accesses\n";
        predictors.push_back(std::make_unique<ReplayPredictor>(
            rnn::precompute_predictions(*checkpoint, trace, c.inference_batch)));
        spec.predictor = predictors.back().get();
      }
    }
    Mrc curve = mrc(trace, spec, sizes);
    for (const auto& r : curve.results) {
      log << std::left << std::setw(12) << r.policy << " C=" << std::setw(8) << r.cache_size
          << " miss ratio " << fmt(r.miss_ratio) << '\n';
      rows.push_back(r);
    }
    curves.push_back(std::move(curve));
  }

  for (const auto& opt : rows) {
    if (opt.policy != "OPT") continue;
    for (const auto& r : rows)
      if (r.cache_size == opt.cache_size && r.misses < opt.misses)
        throw Error(r.policy + " beat OPT at cache size " + std::to_string(r.cache_size));
  }

  auto csv = open_out(c, "sim_results.csv");
  write_results_csv(rows, csv);
  finish(csv, "sim_results.csv");
  if (c.svg) {
    auto svg = open_out(c, "mrc.svg");
    plot::write_mrc_svg(curves, svg);
    finish(svg, "mrc.svg");
  }
}

void cmd_compare(const RunConfig& c, std::ostream& log) {
  std::ifstream in(c.results_path());
  if (!in) throw IoError("cannot open results file: " + c.results_path());
  const auto rows = compare_results(read_results_csv(in));
  log << std::left << std::setw(14) << "policy" << std::setw(8) << "sizes" << std::setw(14) << "mean ratio"
      << std::setw(14) << "vs OPT" << "vs LRU\n";
  for (const auto& r : rows)
    log << std::left << std::setw(14) << r.policy << std::setw(8) << r.sizes << std::setw(14)
        << fmt(r.mean_miss_ratio) << std::setw(14) << fmt(r.mean_delta_vs_opt, "%+.4f")
        << fmt(r.mean_delta_vs_lru, "%+.4f") << '\n';
  auto out = open_out(c, "compare.csv");
  write_compare_csv(rows, out);
  finish(out, "compare.csv");
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (command == "stats") cmd_stats(config, log);
    else if (command == "patterns") cmd_patterns(config, log);
    else if (command == "prepare") cmd_prepare(config, log);
    else if (command == "train") cmd_train(config, log);
    else if (command == "simulate") cmd_simulate(config, log);
    else if (command == "compare") cmd_compare(config, log);
    else throw ConfigError("unknown command: " + command);
    return kOk;
  } catch (const rnn::TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kTrainingError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace fwdrd::cli
