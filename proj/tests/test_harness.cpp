#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rleceo/harness.hpp"

using namespace rleceo;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.problems = {"synthetic/sphere-linear/1", "synthetic/rastrigin-ring/1", "synthetic/griewank-plane/1"};
  cfg.dims = {10};
  cfg.runs = 2;
  cfg.seed = 7;
  cfg.train.max_epoch = 3;
  cfg.train.batch_size = 16;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rleceo_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> finals(const std::vector<RunRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) out.push_back(r.final_sco);
  return out;
}

}  // namespace

TEST(Train, EpisodeAndGradientCounts) {
  ExperimentConfig cfg = small_config();
  cfg.train = TrainConfig{};
  const std::vector<std::string> two{"cec12", "cec14"};
  const TrainResult r = train(cfg, two);
  EXPECT_EQ(r.log.size(), 100u);
  for (const auto& e : r.log) EXPECT_EQ(e.steps, 9u);
  const std::size_t grad = r.log.back().grad_steps;
  EXPECT_EQ(grad, 900u - (TrainConfig{}.batch_size - 1));
  EXPECT_LE(grad, 900u);
  EXPECT_EQ(r.checkpoint.meta.epochs, 50u);
  EXPECT_EQ(r.log.front().epoch, 1u);
  EXPECT_LT(r.log.front().lr, TrainConfig{}.lr_start);
  EXPECT_DOUBLE_EQ(r.log.back().lr, TrainConfig{}.lr_end);
  for (std::size_t i = 1; i < r.log.size(); ++i) EXPECT_LE(r.log[i].lr, r.log[i - 1].lr);
  EXPECT_EQ(r.checkpoint.params.shape(), network_shape(ActionScheme::exponential));
}

TEST(Train, EmptyProblemListIsConfigError) {
  EXPECT_THROW(train(small_config(), {}), ConfigError);
}

TEST(Train, SameSeedSameCheckpointBytes) {
  const ExperimentConfig cfg = small_config();
  const TrainResult a = train(cfg, cfg.problems);
  const TrainResult b = train(cfg, cfg.problems);
  EXPECT_EQ(encode_checkpoint(a.checkpoint), encode_checkpoint(b.checkpoint));
  ExperimentConfig other = cfg;
  other.seed = 8;
  EXPECT_NE(encode_checkpoint(train(other, cfg.problems).checkpoint), encode_checkpoint(a.checkpoint));
}

TEST(Train, AgentBestIsPerProblemAndBelowEveryGbest) {
  const ExperimentConfig cfg = small_config();
  const TrainResult r = train(cfg, cfg.problems);
  std::map<std::string, double> last;
  for (const auto& e : r.log) {
    if (last.count(e.problem)) {
      EXPECT_LE(e.f_agentbest, last[e.problem]);
    }
    last[e.problem] = e.f_agentbest;
  }
  double lowest = HUGE_VAL;
  for (const auto& [_, v] : last) lowest = std::min(lowest, v);
  EXPECT_EQ(r.checkpoint.meta.f_agentbest, lowest);
}

TEST(Evaluate, UnconstrainedProblemScoIsObjective) {
  ExperimentConfig cfg = small_config();
  cfg.runs = 1;
  const Checkpoint ckpt = train(cfg, {"synthetic/sphere-linear/1"}).checkpoint;
  const auto records = evaluate(ckpt, cfg, {"sphere"});
  const ConstrainedProblem p = registry_lookup("sphere", 10);
  for (const auto& r : records) {
    // Replaying the same seed under the feasibility rule gives the same best
    // objective, since epsilon is irrelevant without constraints.
    const RunRecord plain = run_episode(p, cfg.env_config(10), HUGE_VAL, r.seed, feasibility_rule_policy());
    EXPECT_EQ(r.final_sco, plain.final_sco);
  }
  const auto rows = summarize(records);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].std, 0.0);
  EXPECT_EQ(rows[0].runs, 1u);
}

TEST(Evaluate, RepeatedEvaluationGivesIdenticalCsv) {
  const ExperimentConfig cfg = small_config();
  const Checkpoint ckpt = train(cfg, cfg.problems).checkpoint;
  const fs::path dir = fresh_dir("eval");
  write_table_csv(summarize(evaluate(ckpt, cfg, {"cec12"})), dir / "a.csv");
  write_table_csv(summarize(evaluate(ckpt, cfg, {"cec12"})), dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.csv").rfind("problem,dim,method,mean,std,min,runs\ncec12,10,rleceo,", 0), 0u);
}

TEST(Evaluate, RefusesMismatchedCheckpoint) {
  ExperimentConfig cfg = small_config();
  const Checkpoint ckpt = train(cfg, {"synthetic/sphere-linear/1"}).checkpoint;
  cfg.scheme = ActionScheme::linear_aa;
  EXPECT_THROW(evaluate(ckpt, cfg, {"cec12"}), ConfigError);
  cfg = small_config();
  cfg.reward = RewardVariant::r2;
  EXPECT_THROW(evaluate(ckpt, cfg, {"cec12"}), ConfigError);
  cfg = small_config();
  cfg.mask_state = true;
  EXPECT_THROW(evaluate(ckpt, cfg, {"cec12"}), ConfigError);
}

TEST(Baseline, FeasibilityRuleEqualsStaticOnUnconstrained) {
  ExperimentConfig cfg = small_config();
  const auto a = run_baseline("feasibility-rule", cfg, {"sphere"});
  cfg.static_level = 0.7;
  const auto b = run_baseline("static-eps", cfg, {"sphere"});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].generations.size(), b[i].generations.size());
    for (std::size_t g = 0; g < a[i].generations.size(); ++g) {
      EXPECT_EQ(a[i].generations[g].sco, b[i].generations[g].sco);
    }
  }
}

TEST(Baseline, ScheduledEpsilon) {
  const EpsilonBase base({8.0, 1e-3});
  const EpsilonVector end = scheduled_epsilon(base, 500, 500, 5.0);
  EXPECT_EQ(end[0], 0.0);
  EXPECT_EQ(end[1], 0.0);
  const EpsilonVector half = scheduled_epsilon(base, 250, 500, 2.0);
  EXPECT_DOUBLE_EQ(half[0], 2.0);
  EXPECT_DOUBLE_EQ(half[1], 1e-3 / 4);
}

TEST(Baseline, UnknownNameListsValidOnes) {
  try {
    run_baseline("penalty", small_config(), {"cec12"});
    FAIL();
  } catch (const ConfigError& e) {
    for (const auto& n : baseline_names()) EXPECT_NE(std::string(e.what()).find(n), std::string::npos);
  }
  ExperimentConfig cfg = small_config();
  cfg.cp = -1;
  EXPECT_THROW(run_baseline("scheduled-eps", cfg, {"cec12"}), ConfigError);
}

TEST(Baseline, BudgetParityAndPairedSeeds) {
  const ExperimentConfig cfg = small_config();
  std::vector<std::vector<RunRecord>> all;
  for (const auto& name : baseline_names()) all.push_back(run_baseline(name, cfg, {"cec14"}));
  for (const auto& records : all) {
    ASSERT_EQ(records.size(), all.front().size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      EXPECT_EQ(records[i].seed, all.front()[i].seed);
      EXPECT_EQ(records[i].generations.back().fes, 500u);
      // Same seed means the same initial population.
      EXPECT_EQ(records[i].generations.front().sco, all.front()[i].generations.front().sco);
      for (std::size_t g = 1; g < records[i].generations.size(); ++g) {
        EXPECT_GT(records[i].generations[g].fes, records[i].generations[g - 1].fes);
        EXPECT_LE(records[i].generations[g].sco, records[i].generations[g - 1].sco);
      }
      EXPECT_EQ(records[i].final_sco, records[i].generations.back().sco);
    }
  }
}

TEST(Protocols, LeaveOneOut) {
  const ExperimentConfig cfg = small_config();
  const ProtocolResult r = leave_one_out(cfg);
  EXPECT_EQ(r.checkpoints.size(), 3u);
  std::set<std::string> evaluated;
  for (const auto& rec : r.records) evaluated.insert(rec.problem);
  EXPECT_EQ(evaluated.size(), 3u);
  for (const auto& e : r.train_log) EXPECT_NE(e.fold, e.problem);
  EXPECT_EQ(r.train_log.size(), 3u * 2 * cfg.train.max_epoch);

  ExperimentConfig one = cfg;
  one.problems = {"cec12"};
  EXPECT_THROW(leave_one_out(one), ConfigError);
}

TEST(Protocols, LeaveOneOutFilesAreReproducible) {
  const ExperimentConfig cfg = small_config();
  const fs::path a = fresh_dir("loo_a"), b = fresh_dir("loo_b");
  write_protocol(leave_one_out(cfg), a, "loo");
  write_protocol(leave_one_out(cfg), b, "loo");
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(b / fs::relative(entry.path(), a))) << entry.path();
  }
  EXPECT_EQ(files, 6u);
}

TEST(Protocols, Split) {
  const ExperimentConfig cfg = small_config();
  EXPECT_THROW(split_protocol(cfg, {"cec12", "cec14"}, {"cec14"}), ConfigError);
  EXPECT_THROW(split_protocol(cfg, {"cec12"}, {}), ConfigError);
  const ProtocolResult r = split_protocol(cfg, {"synthetic/sphere-linear/1", "synthetic/rastrigin-ring/1"}, {"cec12"});
  for (const auto& e : r.train_log) EXPECT_NE(e.problem, "cec12");
  for (const auto& rec : r.records) EXPECT_EQ(rec.problem, "cec12");
  EXPECT_EQ(r.records.size(), cfg.runs);
}

TEST(Ablation, NoTrainMatchesUntrainedBaseline) {
  ExperimentConfig cfg = small_config();
  cfg.problems = {"synthetic/sphere-linear/1", "cec12"};
  const ProtocolResult r = ablate(cfg, "no-train");
  std::vector<RunRecord> variant;
  for (const auto& rec : r.records) {
    if (rec.method == "no-train") variant.push_back(rec);
  }
  EXPECT_EQ(finals(variant), finals(run_baseline("untrained-agent", cfg, cfg.problems)));
}

TEST(Ablation, VariantsProduceBothMethods) {
  ExperimentConfig cfg = small_config();
  cfg.problems = {"synthetic/sphere-linear/1"};
  cfg.train.max_epoch = 1;
  for (const auto& v : ablation_names()) {
    const ProtocolResult r = ablate(cfg, v);
    std::set<std::string> methods;
    for (const auto& rec : r.records) methods.insert(rec.method);
    EXPECT_EQ(methods, (std::set<std::string>{kFullMethod, v})) << v;
  }
  EXPECT_THROW(ablate(cfg, "no-reward"), ConfigError);
}

TEST(Ablation, NoStateMasksEveryObservedState) {
  ExperimentConfig cfg = small_config();
  cfg.mask_state = true;
  const ConstrainedProblem p = registry_lookup("cec12", 10);
  const NetworkParams net = initial_network(network_shape(cfg.scheme), 1);
  const Policy base = greedy_policy(net);
  std::size_t seen = 0;
  const Policy checking = [&](MetaEnv& env) {
    EXPECT_EQ(env.state(), mask_constraint_features(env.state()));
    ++seen;
    return base(env);
  };
  run_episode(p, cfg.env_config(10), HUGE_VAL, 1, checking);
  EXPECT_EQ(seen, 9u);
  const TrainResult trained = train(cfg, {"synthetic/sphere-linear/1"});
  EXPECT_EQ(trained.checkpoint.meta.extra.at("mask_state"), "true");
}

TEST(Curves, ConstantScoNormalizesToZero) {
  RunRecord r{"p", 10, "m", 0, 1, 3.0, {{0, 50, 3.0}, {1, 100, 3.0}, {2, 150, 3.0}}};
  for (const auto& c : normalized_curves({r})) EXPECT_EQ(c.normalized, 0.0);
  EXPECT_THROW(normalized_curves({}), ContractError);
}

TEST(Curves, BoundsPooledAcrossMethods) {
  RunRecord a{"p", 10, "a", 0, 1, 2.0, {{0, 50, 10.0}, {1, 100, 2.0}}};
  RunRecord b{"p", 10, "b", 0, 1, 6.0, {{0, 50, 10.0}, {1, 100, 6.0}}};
  const auto curves = normalized_curves({a, b});
  ASSERT_EQ(curves.size(), 4u);
  EXPECT_EQ(curves[0].method, "a");
  EXPECT_EQ(curves[1].normalized, 0.0);
  EXPECT_EQ(curves[3].normalized, 0.5);
  EXPECT_EQ(curves[2].normalized, 1.0);
}

TEST(Curves, ExportRoundTrip) {
  const ExperimentConfig cfg = small_config();
  const auto records = run_baseline("scheduled-eps", cfg, {"cec12", "cec14"});
  const fs::path dir = fresh_dir("curves");
  export_curves(records, dir);
  const auto back = read_traces_jsonl(dir / "traces.jsonl");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].final_sco, records[i].final_sco);
    EXPECT_EQ(back[i].generations.size(), records[i].generations.size());
  }
  std::ifstream csv(dir / "curves.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "problem,dim,method,step,fes,normalized_sco");
  std::map<std::string, long> last_fes;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string problem, dim, method, step, fes;
    std::getline(ss, problem, ',');
    std::getline(ss, dim, ',');
    std::getline(ss, method, ',');
    std::getline(ss, step, ',');
    std::getline(ss, fes, ',');
    const std::string key = problem + method;
    if (last_fes.count(key)) {
      EXPECT_GT(std::stol(fes), last_fes[key]);
    }
    last_fes[key] = std::stol(fes);
  }
  EXPECT_EQ(last_fes.size(), 2u);
}

TEST(Output, UnwritablePath) {
  EXPECT_THROW(write_table_csv({}, "/proc/rleceo/x.csv"), Error);
}
