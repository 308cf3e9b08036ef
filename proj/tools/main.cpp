#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Learn forward reuse distance from cache traces and simulate prediction-driven replacement"};
  app.require_subcommand(1);

  std::string config_path, out, trace, format;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;

  const std::pair<const char*, const char*> commands[] = {
      {"stats", "Trace summary statistics"},
      {"patterns", "Reuse-distance time series (CSV + scatter SVG)"},
      {"prepare", "Build a training dataset"},
      {"train", "Train the LSTM forward reuse distance model"},
      {"simulate", "Run cache policies over a size sweep"},
      {"compare", "Summarize simulation results against OPT and LRU"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--seed", seed, "Top-level random seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--trace", trace, "Trace file");
    sub->add_option("--format", format, "Trace format: plain or msr");
    sub->add_option("--set", overrides, "Override a config key (key=value), repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fwdrd::cli::kOk : fwdrd::cli::kInputError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();

  fwdrd::cli::RunConfig config;
  try {
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw fwdrd::cli::ConfigError("--set expects key=value, got " + kv);
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--out")) config.out = out;
    if (sub->count("--trace")) config.trace = trace;
    if (sub->count("--format")) config.set("format", format);
    config.finalize();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fwdrd::cli::kInputError;
  }
  return fwdrd::cli::run_command(command, config, std::cout, std::cerr);
}
