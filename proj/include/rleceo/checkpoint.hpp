#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rleceo/env.hpp"
#include "rleceo/error.hpp"
#include "rleceo/network.hpp"

namespace rleceo {

inline constexpr const char* kCheckpointMagic = "rleceo-ckpt";
inline constexpr const char* kCheckpointVersion = "v1";

inline std::string format_double(double v, int digits = 17) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline bool parse_double(const std::string& text, double& out) {
  if (text == "inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (text == "-inf") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

struct CheckpointMetadata {
  ActionScheme action_scheme = ActionScheme::exponential;
  RewardVariant reward = RewardVariant::full;
  double f_agentbest = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::uint64_t problem_set_hash = 0;
  // Remaining training settings, recorded verbatim.
  std::map<std::string, std::string> extra;
};

struct Checkpoint {
  NetworkParams params;
  CheckpointMetadata meta;
};

inline std::string encode_checkpoint(const Checkpoint& ckpt) {
  const auto& shape = ckpt.params.shape();
  std::ostringstream out;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "shapes " << shape.inputs << ' ' << shape.hidden << ' ' << shape.outputs << '\n';
  out << "action_scheme=" << to_string(ckpt.meta.action_scheme) << " reward=" << to_string(ckpt.meta.reward)
      << " f_agentbest=" << format_double(ckpt.meta.f_agentbest) << " seed=" << ckpt.meta.seed
      << " epochs=" << ckpt.meta.epochs << " problem_set_hash=" << ckpt.meta.problem_set_hash;
  for (const auto& [k, v] : ckpt.meta.extra) out << ' ' << k << '=' << v;
  out << '\n';
  for (double v : ckpt.params.data()) out << format_double(v) << '\n';
  return out.str();
}

inline Checkpoint decode_checkpoint(const std::string& text) {
  using Kind = CheckpointError::Kind;
  std::istringstream in(text);
  std::string line;

  if (!std::getline(in, line)) throw CheckpointError(Kind::parse, "checkpoint is empty");
  {
    std::istringstream ls(line);
    std::string magic, version;
    ls >> magic >> version;
    if (magic != kCheckpointMagic) throw CheckpointError(Kind::parse, "not a checkpoint file");
    if (version != kCheckpointVersion) throw CheckpointError(Kind::version, "unsupported checkpoint version '" + version + "'");
  }

  NetworkShape shape;
  if (!std::getline(in, line)) throw CheckpointError(Kind::parse, "missing shapes line");
  {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag >> shape.inputs >> shape.hidden >> shape.outputs) || tag != "shapes") {
      throw CheckpointError(Kind::parse, "malformed shapes line");
    }
    if (shape.inputs == 0 || shape.hidden == 0 || shape.outputs == 0) {
      throw CheckpointError(Kind::shape, "checkpoint declares an empty layer");
    }
  }

  Checkpoint ckpt{NetworkParams(shape), {}};
  if (!std::getline(in, line)) throw CheckpointError(Kind::parse, "missing metadata line");
  {
    std::istringstream ls(line);
    std::string pair;
    std::map<std::string, std::string> kv;
    while (ls >> pair) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos) throw CheckpointError(Kind::parse, "malformed metadata entry '" + pair + "'");
      kv[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    auto take = [&](const std::string& key) {
      auto it = kv.find(key);
      if (it == kv.end()) throw CheckpointError(Kind::metadata, "metadata is missing '" + key + "'");
      std::string v = it->second;
      kv.erase(it);
      return v;
    };
    try {
      ckpt.meta.action_scheme = parse_action_scheme(take("action_scheme"));
      ckpt.meta.reward = parse_reward_variant(take("reward"));
    } catch (const ConfigError& e) {
      throw CheckpointError(Kind::metadata, e.what());
    }
    if (!parse_double(take("f_agentbest"), ckpt.meta.f_agentbest)) {
      throw CheckpointError(Kind::parse, "bad f_agentbest value");
    }
    auto parse_uint = [&](const std::string& key, auto& dst) {
      const std::string v = take(key);
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), dst);
      if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        throw CheckpointError(Kind::parse, "bad value for '" + key + "'");
      }
    };
    parse_uint("seed", ckpt.meta.seed);
    parse_uint("epochs", ckpt.meta.epochs);
    parse_uint("problem_set_hash", ckpt.meta.problem_set_hash);
    ckpt.meta.extra = std::move(kv);
  }

  if (ActionSpace::make(ckpt.meta.action_scheme).size() != shape.outputs) {
    throw CheckpointError(Kind::shape, "output width does not match the action scheme");
  }

  auto values = ckpt.params.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::getline(in, line)) {
      throw CheckpointError(Kind::parse, "checkpoint truncated after " + std::to_string(i) + " parameters");
    }
    if (!parse_double(line, values[i]) || !std::isfinite(values[i])) {
      throw CheckpointError(Kind::parse, "bad parameter value on line " + std::to_string(i + 4));
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw CheckpointError(Kind::shape, "checkpoint has more parameters than its shapes declare");
  }
  return ckpt;
}

// Written to a temporary file and renamed into place.
inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  using Kind = CheckpointError::Kind;
  const std::string text = encode_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(Kind::io, "cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw CheckpointError(Kind::io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError(Kind::io, "cannot move checkpoint into place: " + ec.message());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path, ActionScheme expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.meta.action_scheme != expected) {
    throw CheckpointError(CheckpointError::Kind::metadata, "checkpoint was trained with action scheme '" +
                                                               to_string(ckpt.meta.action_scheme) + "', expected '" +
                                                               to_string(expected) + "'");
  }
  return ckpt;
}

}  // namespace rleceo
