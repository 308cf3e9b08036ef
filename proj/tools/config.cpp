#include "config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace fwdrd::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> setters = {
      {"trace", [&] { trace = v; }},
      {"format", [&] {
         if (v != "plain" && v != "msr") throw ConfigError("format must be plain or msr");
         format = v;
       }},
      {"block_size", [&] { block_size = parse_number<std::uint64_t>(key, v); }},
      {"expand_multiblock", [&] { expand_multiblock = parse_bool(key, v); }},
      {"k_avg", [&] { k_avg = parse_number<std::size_t>(key, v); }},
      {"k_freq", [&] { k_freq = parse_number<std::size_t>(key, v); }},
      {"sequence_length", [&] { sequence_length = parse_number<std::size_t>(key, v); }},
      {"k_min", [&] { k_min = parse_number<std::size_t>(key, v); }},
      {"k_max", [&] { k_max = parse_number<std::size_t>(key, v); }},
      {"train_ratio", [&] { train_ratio = parse_number<double>(key, v); }},
      {"train_take", [&] { train_take = parse_number<std::size_t>(key, v); }},
      {"val_take", [&] { val_take = parse_number<std::size_t>(key, v); }},
      {"debug_csv", [&] { debug_csv = parse_bool(key, v); }},
      {"epochs", [&] { train.epochs = parse_number<std::size_t>(key, v); }},
      {"learning_rate", [&] { train.learning_rate = parse_number<double>(key, v); }},
      {"batch_size", [&] { train.batch_size = parse_number<std::size_t>(key, v); }},
      {"dropout", [&] { train.dropout = parse_number<double>(key, v); }},
      {"patience", [&] { train.patience = parse_number<std::size_t>(key, v); }},
      {"min_delta", [&] { train.min_delta = parse_number<double>(key, v); }},
      {"lstm_width", [&] { train.width = parse_number<std::size_t>(key, v); }},
      {"lstm_layers", [&] { train.layers = parse_number<std::size_t>(key, v); }},
      {"clip_norm", [&] { train.clip_norm = parse_number<double>(key, v); }},
      {"policies", [&] { policies = split_list(v); }},
      {"sizes", [&] {
         sizes.clear();
         for (const auto& s : split_list(v)) sizes.push_back(parse_number<std::size_t>(key, s));
       }},
      {"inference_batch", [&] { inference_batch = parse_number<std::size_t>(key, v); }},
      {"svg", [&] { svg = parse_bool(key, v); }},
      {"out", [&] { out = v; }},
      {"seed", [&] { seed = parse_number<std::uint64_t>(key, v); }},
      {"dataset", [&] { dataset = v; }},
      {"checkpoint", [&] { checkpoint = v; }},
      {"results", [&] { results = v; }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key: " + key);
  it->second();
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::finalize() {
  train.seed = seed;
  try {
    train.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (sequence_length == 0) throw ConfigError("sequence_length must be >= 1");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ConfigError("train_ratio must be in (0, 1)");
}

std::string RunConfig::out_path(const std::string& name) const {
  return (std::filesystem::path(out) / name).string();
}

std::string RunConfig::dataset_path() const { return dataset.empty() ? out_path("dataset.rlds") : dataset; }

std::string RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? out_path("checkpoint.rlck") : checkpoint;
}

std::string RunConfig::results_path() const {
  return results.empty() ? out_path("sim_results.csv") : results;
}

}  // namespace fwdrd::cli
