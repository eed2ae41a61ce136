#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rleceo/dqn.hpp"
#include "rleceo/env.hpp"
#include "rleceo/error.hpp"

namespace rleceo {

struct ExperimentConfig {
  std::vector<std::string> problems = {"cec12", "cec14"};
  std::vector<std::size_t> dims = {10};
  std::size_t pop_size = 50;
  std::size_t maxfes_per_dim = 50;
  std::size_t maxfes = 0;  // nonzero overrides maxfes_per_dim * D
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  bool lpsr = false;
  ActionScheme scheme = ActionScheme::exponential;
  RewardVariant reward = RewardVariant::full;
  bool mask_state = false;
  double delta = kDefaultDelta;
  double accuracy = kDefaultAccuracy;
  TrainConfig train;
  std::vector<std::string> train_problems;
  std::vector<std::string> test_problems;
  double static_level = 0.5;
  double cp = 5.0;
  std::string output_dir = "out";
  std::string shift_file;

  std::size_t maxfes_for(std::size_t dim) const { return maxfes != 0 ? maxfes : maxfes_per_dim * dim; }

  EnvConfig env_config(std::size_t dim) const {
    EnvConfig e;
    e.maxfes = maxfes_for(dim);
    e.scheme = scheme;
    e.reward = reward;
    e.delta = delta;
    e.accuracy = accuracy;
    e.mask_state = mask_state;
    e.lshade.pop_size = pop_size;
    e.lshade.lpsr = lpsr;
    return e;
  }

  void validate() const {
    if (dims.empty()) throw ConfigError("dims must not be empty");
    if (pop_size < kMinPopulation) throw ConfigError("pop_size must be >= " + std::to_string(kMinPopulation));
    for (std::size_t d : dims) {
      if (d == 0) throw ConfigError("dims entries must be positive");
      if (maxfes_for(d) < 2 * pop_size) {
        throw ConfigError("maxfes " + std::to_string(maxfes_for(d)) + " for D=" + std::to_string(d) +
                          " is below 2 * pop_size");
      }
    }
    if (runs == 0) throw ConfigError("runs must be >= 1");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (!(accuracy >= 0.0)) throw ConfigError("accuracy must be >= 0");
    if (!(static_level >= 0.0 && static_level <= 1.0)) throw ConfigError("static_level must lie in [0, 1]");
    if (!(cp > 0.0)) throw ConfigError("cp must be positive");
    train.validate();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean '" + text + "' for " + key);
}

inline std::vector<std::size_t> parse_dims(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<std::size_t>(key, item));
  return out;
}

}  // namespace detail

inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  using Setter = std::function<void(const std::string&)>;
  auto size = [&](std::size_t& dst) { return Setter([&dst, key](const std::string& v) { dst = parse_number<std::size_t>(key, v); }); };
  auto real = [&](double& dst) { return Setter([&dst, key](const std::string& v) { dst = parse_number<double>(key, v); }); };
  const std::map<std::string, Setter> setters = {
      {"problems", [&](const std::string& v) { cfg.problems = split_list(v); }},
      {"dims", [&](const std::string& v) { cfg.dims = parse_dims(key, v); }},
      {"pop_size", size(cfg.pop_size)},
      {"maxfes_per_dim", size(cfg.maxfes_per_dim)},
      {"maxfes", size(cfg.maxfes)},
      {"runs", size(cfg.runs)},
      {"seed", [&](const std::string& v) { cfg.seed = parse_number<std::uint64_t>(key, v); }},
      {"lpsr", [&](const std::string& v) { cfg.lpsr = parse_bool(key, v); }},
      {"action_scheme", [&](const std::string& v) { cfg.scheme = parse_action_scheme(v); }},
      {"reward", [&](const std::string& v) { cfg.reward = parse_reward_variant(v); }},
      {"mask_state", [&](const std::string& v) { cfg.mask_state = parse_bool(key, v); }},
      {"delta", real(cfg.delta)},
      {"accuracy", real(cfg.accuracy)},
      {"epochs", size(cfg.train.max_epoch)},
      {"lr_start", real(cfg.train.lr_start)},
      {"lr_end", real(cfg.train.lr_end)},
      {"discount", real(cfg.train.discount)},
      {"sync_period", size(cfg.train.sync_period)},
      {"explore_start", real(cfg.train.explore_start)},
      {"explore_end", real(cfg.train.explore_end)},
      {"explore_fraction", real(cfg.train.explore_fraction)},
      {"buffer_capacity", size(cfg.train.buffer_capacity)},
      {"batch_size", size(cfg.train.batch_size)},
      {"train", [&](const std::string& v) { cfg.train_problems = split_list(v); }},
      {"test", [&](const std::string& v) { cfg.test_problems = split_list(v); }},
      {"static_level", real(cfg.static_level)},
      {"cp", real(cfg.cp)},
      {"output_dir", [&](const std::string& v) { cfg.output_dir = v; }},
      {"shift_file", [&](const std::string& v) { cfg.shift_file = v; }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) {
    std::string valid;
    for (const auto& [k, _] : setters) valid += (valid.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key '" + key + "' (valid: " + valid + ")");
  }
  it->second(value);
}

// `key = value` lines; `#` starts a comment; lists are comma-separated.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace rleceo
