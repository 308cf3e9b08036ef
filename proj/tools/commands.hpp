#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"
#include "fwdrd/trace_io.hpp"

namespace fwdrd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kTrainingError = 3 };

void cmd_stats(const RunConfig& config, std::ostream& log);
void cmd_patterns(const RunConfig& config, std::ostream& log);
void cmd_prepare(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_compare(const RunConfig& config, std::ostream& log);

/// Dispatches `command`, reporting errors on `err` and mapping them to exit codes.
int run_command(const std::string& command, const RunConfig& config, std::ostream& log, std::ostream& err);

/// `length,unique_blocks,mean_accesses_per_block,unique_deltas,delta_compression_ratio`
void write_stats_csv(const TraceStats& stats, std::ostream& out);
TraceStats read_stats_csv(std::istream& in);

/// Cache sizes used when none are configured: fractions 1/64 .. 1 of the
/// distinct-block count, at least 4 blocks, deduplicated.
std::vector<std::size_t> default_sizes(const Trace& trace);

}  // namespace fwdrd::cli
