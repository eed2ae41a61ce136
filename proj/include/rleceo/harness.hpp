#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "rleceo/checkpoint.hpp"
#include "rleceo/config.hpp"
#include "rleceo/dqn.hpp"
#include "rleceo/env.hpp"
#include "rleceo/problems.hpp"

namespace rleceo {

struct GenerationRecord {
  std::size_t step = 0;
  std::size_t fes = 0;
  double sco = 0.0;
  double level = 0.0;
  double eps_min = 0.0;
  double eps_mean = 0.0;
  double eps_max = 0.0;
  double reward = 0.0;
};

struct RunRecord {
  std::string problem;
  std::size_t dim = 0;
  std::string method;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double final_sco = 0.0;
  std::vector<GenerationRecord> generations;
};

struct TableRow {
  std::string problem;
  std::size_t dim = 0;
  std::string method;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  std::size_t runs = 0;
};

struct EpisodeLog {
  std::string fold;  // empty outside protocols
  std::size_t epoch = 0;  // 1-based
  std::string problem;
  std::size_t dim = 0;
  double lr = 0.0;
  std::size_t steps = 0;
  double episode_return = 0.0;
  double mean_loss = 0.0;
  std::size_t grad_steps = 0;
  double f_agentbest = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpisodeLog> log;
};

// Chooses and applies one meta-step.
using Policy = std::function<StepResult(MetaEnv&)>;

inline constexpr const char* kFullMethod = "rleceo";

// Problems resolved through the registry, with the config's shift file applied.
class ProblemSource {
 public:
  explicit ProblemSource(const ExperimentConfig& cfg) {
    if (!cfg.shift_file.empty()) shifts_ = load_shift_file(cfg.shift_file);
  }

  ConstrainedProblem get(const std::string& name, std::size_t dim) const {
    return registry_lookup(name, dim, shifts_ ? &*shifts_ : nullptr);
  }

 private:
  std::optional<ShiftTable> shifts_;
};

// Paired seeds: every method sees the same seed for a given (problem, dim, run).
inline std::uint64_t run_seed(std::uint64_t base, const std::string& problem, std::size_t dim, std::size_t run) {
  return mix_seed(base, hash_name("eval"), hash_name(problem), dim, run);
}

inline std::uint64_t train_seed(std::uint64_t base, std::size_t epoch, const std::string& problem, std::size_t dim) {
  return mix_seed(base, hash_name("train"), epoch, hash_name(problem), dim);
}

inline std::uint64_t agent_seed(std::uint64_t base) { return mix_seed(base, hash_name("agent")); }

inline NetworkShape network_shape(ActionScheme scheme) {
  return NetworkShape{kStateSize, 64, ActionSpace::make(scheme).size()};
}

// Meta-steps in one episode when the population size never changes.
inline std::size_t episode_steps(std::size_t maxfes, std::size_t pop_size) {
  return maxfes < 2 * pop_size ? 0 : (maxfes - pop_size) / pop_size;
}

inline std::uint64_t problem_set_hash(const std::vector<std::string>& problems, const std::vector<std::size_t>& dims) {
  std::vector<std::string> keys;
  for (std::size_t d : dims) {
    for (const auto& p : problems) keys.push_back(p + "@" + std::to_string(d));
  }
  std::sort(keys.begin(), keys.end());
  std::string joined;
  for (const auto& k : keys) joined += k + ";";
  return hash_name(joined);
}

// Policies

inline Policy greedy_policy(const NetworkParams& params) {
  return [&params](MetaEnv& env) { return env.step(argmax(forward(params, env.state()))); };
}

inline Policy static_eps_policy(double level) {
  if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("static level must lie in [0, 1]");
  return [level](MetaEnv& env) { return env.step_with(epsilon_from_action(level, env.eps_base()), level); };
}

// eps_t = eps_base * (1 - fes/maxfes)^cp, componentwise.
inline EpsilonVector scheduled_epsilon(const EpsilonBase& base, std::size_t fes, std::size_t maxfes, double cp) {
  const double progress = std::clamp(static_cast<double>(fes) / static_cast<double>(maxfes), 0.0, 1.0);
  const double factor = std::pow(1.0 - progress, cp);
  std::vector<double> eps(base.size());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = base[i] * factor;
  return EpsilonVector(std::move(eps));
}

inline Policy scheduled_eps_policy(double cp) {
  if (!(cp > 0.0)) throw ConfigError("cp must be positive");
  return [cp](MetaEnv& env) {
    const std::size_t maxfes = env.config().maxfes;
    const double factor = std::pow(1.0 - static_cast<double>(env.fes()) / static_cast<double>(maxfes), cp);
    return env.step_with(scheduled_epsilon(env.eps_base(), env.fes(), maxfes, cp), factor);
  };
}

inline Policy feasibility_rule_policy() {
  return [](MetaEnv& env) { return env.step_with(EpsilonVector::zeros(env.problem().num_constraints()), 0.0); };
}

// Episodes

inline RunRecord run_episode(const ConstrainedProblem& problem, const EnvConfig& env_cfg, double f_agentbest,
                             std::uint64_t seed, const Policy& policy) {
  MetaEnv env(problem, env_cfg, f_agentbest);
  env.reset(seed);
  RunRecord rec;
  rec.problem = problem.name();
  rec.dim = problem.dim();
  rec.seed = seed;
  rec.generations.push_back({0, env.fes(), env.best_sco(), 1.0, env.epsilon().min(), env.epsilon().mean(),
                             env.epsilon().max(), 0.0});
  while (!env.terminal()) {
    const StepResult r = policy(env);
    rec.generations.push_back({env.steps(), r.info.fes, r.info.best_sco, r.info.level, r.info.eps_min,
                               r.info.eps_mean, r.info.eps_max, r.transition.reward});
  }
  rec.final_sco = env.best_sco();
  return rec;
}

inline std::vector<RunRecord> evaluate_policy(const ExperimentConfig& cfg, const std::vector<std::string>& problems,
                                              const std::string& method, const Policy& policy,
                                              double f_agentbest = std::numeric_limits<double>::infinity(),
                                              std::optional<EnvConfig> env_override = std::nullopt) {
  const ProblemSource source(cfg);
  std::vector<RunRecord> out;
  for (std::size_t dim : cfg.dims) {
    const EnvConfig env_cfg = env_override ? *env_override : cfg.env_config(dim);
    for (const auto& name : problems) {
      const ConstrainedProblem problem = source.get(name, dim);
      for (std::size_t run = 0; run < cfg.runs; ++run) {
        RunRecord rec = run_episode(problem, env_cfg, f_agentbest, run_seed(cfg.seed, name, dim, run), policy);
        rec.problem = name;
        rec.method = method;
        rec.run = run;
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

// Training

inline TrainResult train(const ExperimentConfig& cfg, const std::vector<std::string>& problems) {
  if (problems.empty()) throw ConfigError("training needs at least one problem");
  cfg.validate();
  const ProblemSource source(cfg);
  const TrainConfig& tc = cfg.train;
  const NetworkShape shape = network_shape(cfg.scheme);

  std::size_t total_steps = 0;
  for (std::size_t d : cfg.dims) total_steps += problems.size() * episode_steps(cfg.maxfes_for(d), cfg.pop_size);
  total_steps *= tc.max_epoch;

  std::vector<std::pair<std::size_t, ConstrainedProblem>> set;
  for (std::size_t d : cfg.dims) {
    for (const auto& name : problems) set.emplace_back(d, source.get(name, d));
  }

  DqnAgent agent(shape, tc, agent_seed(cfg.seed));
  std::map<std::pair<std::string, std::size_t>, double> agentbest;
  TrainResult result;
  std::size_t meta_step = 0;

  for (std::size_t epoch = 1; epoch <= tc.max_epoch; ++epoch) {
    const double lr = cosine_lr(static_cast<double>(epoch), tc);
    for (std::size_t k = 0; k < set.size(); ++k) {
      const std::size_t dim = set[k].first;
      const ConstrainedProblem& problem = set[k].second;
      const std::string& name = problems[k % problems.size()];
      auto [it, _] = agentbest.try_emplace({name, dim}, std::numeric_limits<double>::infinity());
      EpisodeLog entry{"", epoch, name, dim, lr};
      std::size_t losses = 0;
      try {
        MetaEnv env(problem, cfg.env_config(dim), it->second);
        env.reset(train_seed(cfg.seed, epoch, name, dim));
        while (!env.terminal()) {
          const std::size_t action = agent.act(env.state(), explore_rate(meta_step++, total_steps, tc));
          const StepResult r = env.step(action);
          entry.episode_return += r.transition.reward;
          const double loss = agent.observe(r.transition, lr);
          if (loss >= 0.0) {
            entry.mean_loss += loss;
            ++losses;
          }
        }
        entry.steps = env.steps();
        it->second = env.f_agentbest();
      } catch (const Error& e) {
        throw Error("training failed at epoch " + std::to_string(epoch) + ", problem " + name + " (D=" +
                    std::to_string(dim) + "): " + e.what());
      }
      if (losses > 0) entry.mean_loss /= static_cast<double>(losses);
      entry.grad_steps = agent.grad_steps();
      entry.f_agentbest = it->second;
      result.log.push_back(entry);
    }
  }

  CheckpointMetadata& meta = result.checkpoint.meta;
  meta.action_scheme = cfg.scheme;
  meta.reward = cfg.reward;
  meta.f_agentbest = std::numeric_limits<double>::infinity();
  for (const auto& [key, v] : agentbest) meta.f_agentbest = std::min(meta.f_agentbest, v);
  meta.seed = cfg.seed;
  meta.epochs = tc.max_epoch;
  meta.problem_set_hash = problem_set_hash(problems, cfg.dims);
  std::string names;
  for (const auto& p : problems) names += (names.empty() ? "" : ",") + p;
  std::string dims;
  for (std::size_t d : cfg.dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  meta.extra = {
      {"problems", names},
      {"dims", dims},
      {"pop_size", std::to_string(cfg.pop_size)},
      {"maxfes_per_dim", std::to_string(cfg.maxfes_per_dim)},
      {"maxfes", std::to_string(cfg.maxfes)},
      {"lpsr", cfg.lpsr ? "true" : "false"},
      {"mask_state", cfg.mask_state ? "true" : "false"},
      {"delta", format_double(cfg.delta)},
      {"lr_start", format_double(tc.lr_start)},
      {"lr_end", format_double(tc.lr_end)},
      {"discount", format_double(tc.discount)},
      {"sync_period", std::to_string(tc.sync_period)},
      {"explore_start", format_double(tc.explore_start)},
      {"explore_end", format_double(tc.explore_end)},
      {"explore_fraction", format_double(tc.explore_fraction)},
      {"buffer_capacity", std::to_string(tc.buffer_capacity)},
      {"batch_size", std::to_string(tc.batch_size)},
      {"grad_steps", std::to_string(agent.grad_steps())},
  };
  result.checkpoint.params = agent.online();
  return result;
}

// Evaluation and baselines

inline void check_compatible(const Checkpoint& ckpt, const ExperimentConfig& cfg) {
  if (ckpt.meta.action_scheme != cfg.scheme) {
    throw ConfigError("checkpoint uses action scheme '" + to_string(ckpt.meta.action_scheme) + "' but config asks for '" +
                      to_string(cfg.scheme) + "'");
  }
  if (ckpt.meta.reward != cfg.reward) {
    throw ConfigError("checkpoint was trained with reward '" + to_string(ckpt.meta.reward) + "' but config asks for '" +
                      to_string(cfg.reward) + "'");
  }
  if (!(ckpt.params.shape() == network_shape(cfg.scheme))) throw ConfigError("checkpoint network shape mismatch");
  const auto mask = ckpt.meta.extra.find("mask_state");
  if (mask != ckpt.meta.extra.end() && (mask->second == "true") != cfg.mask_state) {
    throw ConfigError("checkpoint mask_state=" + mask->second + " does not match the config");
  }
}

inline std::vector<RunRecord> evaluate(const Checkpoint& ckpt, const ExperimentConfig& cfg,
                                       const std::vector<std::string>& problems, const std::string& method = kFullMethod) {
  cfg.validate();
  check_compatible(ckpt, cfg);
  return evaluate_policy(cfg, problems, method, greedy_policy(ckpt.params), ckpt.meta.f_agentbest);
}

inline const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names = {"static-eps", "scheduled-eps", "feasibility-rule", "untrained-agent"};
  return names;
}

inline std::vector<RunRecord> run_baseline(const std::string& name, const ExperimentConfig& cfg,
                                           const std::vector<std::string>& problems) {
  cfg.validate();
  if (name == "static-eps") {
    return evaluate_policy(cfg, problems, "static-eps(a=" + format_double(cfg.static_level, 6) + ")",
                           static_eps_policy(cfg.static_level));
  }
  if (name == "scheduled-eps") {
    return evaluate_policy(cfg, problems, "scheduled-eps(cp=" + format_double(cfg.cp, 6) + ")",
                           scheduled_eps_policy(cfg.cp));
  }
  if (name == "feasibility-rule") return evaluate_policy(cfg, problems, name, feasibility_rule_policy());
  if (name == "untrained-agent") {
    const NetworkParams fresh = initial_network(network_shape(cfg.scheme), agent_seed(cfg.seed));
    return evaluate_policy(cfg, problems, name, greedy_policy(fresh));
  }
  std::string valid;
  for (const auto& n : baseline_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown baseline '" + name + "' (valid: " + valid + ")");
}

// Protocols

struct ProtocolResult {
  std::vector<RunRecord> records;
  std::vector<EpisodeLog> train_log;
  std::vector<std::pair<std::string, Checkpoint>> checkpoints;  // fold name, checkpoint
};

namespace detail {

inline void check_held_out(const std::vector<EpisodeLog>& log, const std::vector<std::string>& test) {
  for (const auto& e : log) {
    if (std::find(test.begin(), test.end(), e.problem) != test.end()) {
      throw Error("held-out problem '" + e.problem + "' appeared in a training episode");
    }
  }
}

inline void append_fold(ProtocolResult& out, const std::string& fold, TrainResult trained,
                        std::vector<RunRecord> records) {
  for (auto& e : trained.log) {
    e.fold = fold;
    out.train_log.push_back(std::move(e));
  }
  for (auto& r : records) out.records.push_back(std::move(r));
  out.checkpoints.emplace_back(fold, std::move(trained.checkpoint));
}

}  // namespace detail

inline ProtocolResult leave_one_out(const ExperimentConfig& cfg) {
  if (cfg.problems.size() < 2) throw ConfigError("leave-one-out needs at least two problems");
  cfg.validate();
  ProtocolResult out;
  for (const auto& held : cfg.problems) {
    std::vector<std::string> rest;
    for (const auto& p : cfg.problems) {
      if (p != held) rest.push_back(p);
    }
    TrainResult trained = train(cfg, rest);
    detail::check_held_out(trained.log, {held});
    std::vector<RunRecord> records = evaluate(trained.checkpoint, cfg, {held});
    detail::append_fold(out, held, std::move(trained), std::move(records));
  }
  return out;
}

inline ProtocolResult split_protocol(const ExperimentConfig& cfg, const std::vector<std::string>& train_names,
                                     const std::vector<std::string>& test_names) {
  if (train_names.empty()) throw ConfigError("split needs a non-empty training list");
  if (test_names.empty()) throw ConfigError("split needs a non-empty test list");
  for (const auto& t : test_names) {
    if (std::find(train_names.begin(), train_names.end(), t) != train_names.end()) {
      throw ConfigError("problem '" + t + "' is in both the training and the test list");
    }
  }
  cfg.validate();
  ProtocolResult out;
  TrainResult trained = train(cfg, train_names);
  detail::check_held_out(trained.log, test_names);
  std::vector<RunRecord> records = evaluate(trained.checkpoint, cfg, test_names);
  detail::append_fold(out, "split", std::move(trained), std::move(records));
  return out;
}

inline const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {"no-state", "aa", "ca", "r1", "r2", "r1r2", "no-train"};
  return names;
}

// Trains on cfg.train_problems (or cfg.problems) and evaluates the full method
// and the variant on cfg.test_problems (or cfg.problems) with shared seeds.
inline ProtocolResult ablate(const ExperimentConfig& cfg, const std::string& variant) {
  const auto& names = ablation_names();
  if (std::find(names.begin(), names.end(), variant) == names.end()) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown ablation '" + variant + "' (valid: " + valid + ")");
  }
  const auto& train_names = cfg.train_problems.empty() ? cfg.problems : cfg.train_problems;
  const auto& test_names = cfg.test_problems.empty() ? cfg.problems : cfg.test_problems;

  ProtocolResult out;
  TrainResult full = train(cfg, train_names);
  std::vector<RunRecord> full_records = evaluate(full.checkpoint, cfg, test_names, kFullMethod);
  detail::append_fold(out, kFullMethod, std::move(full), std::move(full_records));

  if (variant == "no-train") {
    const NetworkParams fresh = initial_network(network_shape(cfg.scheme), agent_seed(cfg.seed));
    for (auto& r : evaluate_policy(cfg, test_names, variant, greedy_policy(fresh))) out.records.push_back(std::move(r));
    return out;
  }
  ExperimentConfig vcfg = cfg;
  if (variant == "no-state") vcfg.mask_state = true;
  if (variant == "aa") vcfg.scheme = ActionScheme::linear_aa;
  if (variant == "ca") vcfg.scheme = ActionScheme::linear_ca;
  if (variant == "r1") vcfg.reward = RewardVariant::r1;
  if (variant == "r2") vcfg.reward = RewardVariant::r2;
  if (variant == "r1r2") vcfg.reward = RewardVariant::r1r2;
  TrainResult trained = train(vcfg, train_names);
  std::vector<RunRecord> records = evaluate(trained.checkpoint, vcfg, test_names, variant);
  detail::append_fold(out, variant, std::move(trained), std::move(records));
  return out;
}

// Tables and files

inline std::vector<TableRow> summarize(const std::vector<RunRecord>& records) {
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.problem, r.dim, r.method}].push_back(r.final_sco);
  std::vector<TableRow> rows;
  for (const auto& [key, values] : groups) {
    TableRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key)};
    row.runs = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - row.mean) * (v - row.mean);
    row.std = std::sqrt(var / static_cast<double>(values.size()));
    row.min = *std::min_element(values.begin(), values.end());
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  if (!out.flush()) throw Error("write failed for '" + path.string() + "'");
}

inline std::string csv_number(double v) { return format_double(v, 10); }

// Records ordered by (problem, dim, method, run) so output never depends on
// the order runs were produced in.
inline std::vector<const RunRecord*> sorted_records(const std::vector<RunRecord>& records) {
  std::vector<const RunRecord*> out;
  for (const auto& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tie(a->problem, a->dim, a->method, a->run) < std::tie(b->problem, b->dim, b->method, b->run);
  });
  return out;
}

}  // namespace detail

inline void write_table_csv(const std::vector<TableRow>& rows, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "problem,dim,method,mean,std,min,runs\n";
  for (const auto& r : rows) {
    out << r.problem << ',' << r.dim << ',' << r.method << ',' << detail::csv_number(r.mean) << ','
        << detail::csv_number(r.std) << ',' << detail::csv_number(r.min) << ',' << r.runs << '\n';
  }
  detail::finish(out, path);
}

inline void write_traces_jsonl(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const RunRecord* r : detail::sorted_records(records)) {
    for (const auto& g : r->generations) {
      nlohmann::ordered_json j;
      j["problem"] = r->problem;
      j["dim"] = r->dim;
      j["method"] = r->method;
      j["run"] = r->run;
      j["seed"] = r->seed;
      j["step"] = g.step;
      j["fes"] = g.fes;
      j["sco"] = g.sco;
      j["level"] = g.level;
      j["eps_min"] = g.eps_min;
      j["eps_mean"] = g.eps_mean;
      j["eps_max"] = g.eps_max;
      j["reward"] = g.reward;
      out << j.dump() << '\n';
    }
  }
  detail::finish(out, path);
}

inline std::vector<RunRecord> read_traces_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::map<std::tuple<std::string, std::size_t, std::string, std::size_t>, RunRecord> runs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto key = std::make_tuple(j.at("problem").get<std::string>(), j.at("dim").get<std::size_t>(),
                                       j.at("method").get<std::string>(), j.at("run").get<std::size_t>());
      RunRecord& r = runs[key];
      std::tie(r.problem, r.dim, r.method, r.run) = key;
      r.seed = j.at("seed").get<std::uint64_t>();
      GenerationRecord g;
      g.step = j.at("step").get<std::size_t>();
      g.fes = j.at("fes").get<std::size_t>();
      g.sco = j.at("sco").get<double>();
      g.level = j.at("level").get<double>();
      g.eps_min = j.at("eps_min").get<double>();
      g.eps_mean = j.at("eps_mean").get<double>();
      g.eps_max = j.at("eps_max").get<double>();
      g.reward = j.at("reward").get<double>();
      r.generations.push_back(g);
      r.final_sco = g.sco;
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::vector<RunRecord> out;
  for (auto& [_, r] : runs) out.push_back(std::move(r));
  return out;
}

inline void write_train_log(const std::vector<EpisodeLog>& log, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto& e : log) {
    nlohmann::ordered_json j;
    if (!e.fold.empty()) j["fold"] = e.fold;
    j["epoch"] = e.epoch;
    j["problem"] = e.problem;
    j["dim"] = e.dim;
    j["lr"] = e.lr;
    j["steps"] = e.steps;
    j["return"] = e.episode_return;
    j["mean_loss"] = e.mean_loss;
    j["grad_steps"] = e.grad_steps;
    j["f_agentbest"] = e.f_agentbest;
    out << j.dump() << '\n';
  }
  detail::finish(out, path);
}

struct CurvePoint {
  std::string problem;
  std::size_t dim = 0;
  std::string method;
  std::size_t step = 0;
  std::size_t fes = 0;
  double normalized = 0.0;
};

// Per (problem, dim), min-max bounds are pooled over every method, run and
// generation; a zero range maps everything to 0.
inline std::vector<CurvePoint> normalized_curves(const std::vector<RunRecord>& records) {
  if (records.empty()) throw ContractError("no records to build curves from");
  std::map<std::pair<std::string, std::size_t>, std::pair<double, double>> bounds;
  for (const auto& r : records) {
    auto [it, fresh] = bounds.try_emplace({r.problem, r.dim}, std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity());
    for (const auto& g : r.generations) {
      it->second.first = std::min(it->second.first, g.sco);
      it->second.second = std::max(it->second.second, g.sco);
    }
  }
  // (problem, dim, method, step) -> (fes, sum, count)
  std::map<std::tuple<std::string, std::size_t, std::string, std::size_t>, std::tuple<std::size_t, double, std::size_t>>
      acc;
  for (const auto& r : records) {
    const auto [lo, hi] = bounds.at({r.problem, r.dim});
    const double range = hi - lo;
    for (const auto& g : r.generations) {
      auto& [fes, sum, count] = acc[{r.problem, r.dim, r.method, g.step}];
      fes = std::max(fes, g.fes);
      sum += range > 0.0 ? (g.sco - lo) / range : 0.0;
      ++count;
    }
  }
  std::vector<CurvePoint> out;
  for (const auto& [key, v] : acc) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), std::get<0>(v),
                   std::get<1>(v) / static_cast<double>(std::get<2>(v))});
  }
  return out;
}

inline void export_curves(const std::vector<RunRecord>& records, const std::filesystem::path& dir) {
  const auto curves = normalized_curves(records);
  write_traces_jsonl(records, dir / "traces.jsonl");
  const auto path = dir / "curves.csv";
  auto out = detail::open_output(path);
  out << "problem,dim,method,step,fes,normalized_sco\n";
  for (const auto& c : curves) {
    out << c.problem << ',' << c.dim << ',' << c.method << ',' << c.step << ',' << c.fes << ','
        << detail::csv_number(c.normalized) << '\n';
  }
  detail::finish(out, path);
}

// Writes table, traces, training log and checkpoints for one protocol run.
inline void write_protocol(const ProtocolResult& result, const std::filesystem::path& dir, const std::string& stem) {
  write_table_csv(summarize(result.records), dir / (stem + ".csv"));
  write_traces_jsonl(result.records, dir / (stem + "_traces.jsonl"));
  write_train_log(result.train_log, dir / (stem + "_train_log.jsonl"));
  for (std::size_t i = 0; i < result.checkpoints.size(); ++i) {
    std::filesystem::create_directories(dir / stem);
    save_checkpoint(result.checkpoints[i].second, dir / stem / ("fold" + std::to_string(i) + ".ckpt"));
  }
}

}  // namespace rleceo
