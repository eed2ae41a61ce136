// Command-line front end for training, evaluation, baselines and protocols.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rleceo/rleceo.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> runs;
  std::vector<std::size_t> dims;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config, "key = value config file");
  cmd->add_option("--seed", opt.seed, "seed base");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--runs", opt.runs, "independent runs per problem");
  cmd->add_option("--dims", opt.dims, "problem dimensions")->delimiter(',');
}

rleceo::ExperimentConfig resolve(const CommonOptions& opt) {
  rleceo::ExperimentConfig cfg = opt.config.empty() ? rleceo::ExperimentConfig{} : rleceo::load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.out) cfg.output_dir = *opt.out;
  if (opt.runs) cfg.runs = *opt.runs;
  if (!opt.dims.empty()) cfg.dims = opt.dims;
  cfg.validate();
  return cfg;
}

void report(const std::vector<rleceo::TableRow>& rows) {
  for (const auto& r : rows) {
    std::cout << r.problem << " D=" << r.dim << " " << r.method << ": " << r.mean << " +- " << r.std << " (min "
              << r.min << ", runs " << r.runs << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned epsilon-relaxation control for constrained evolutionary optimization"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string checkpoint;
  std::string baseline;
  std::optional<double> level;
  std::optional<double> cp;
  std::vector<std::string> train_list;
  std::vector<std::string> test_list;
  std::string variant;
  std::vector<std::string> inputs;

  auto* train = app.add_subcommand("train", "train an agent on the configured problems");
  add_common(train, opt);
  train->add_option("--checkpoint", checkpoint, "checkpoint path (default <out>/checkpoint.ckpt)");

  auto* evaluate = app.add_subcommand("evaluate", "greedy evaluation of a trained checkpoint");
  add_common(evaluate, opt);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint to evaluate")->required();

  auto* base = app.add_subcommand("baseline", "run a non-learning baseline");
  add_common(base, opt);
  base->add_option("--name", baseline, "static-eps, scheduled-eps, feasibility-rule or untrained-agent")->required();
  base->add_option("--level", level, "static-eps action level in [0, 1]");
  base->add_option("--cp", cp, "scheduled-eps exponent");

  auto* loo = app.add_subcommand("loo", "leave-one-out over the configured problems");
  add_common(loo, opt);

  auto* split = app.add_subcommand("split", "train on one list, evaluate on another");
  add_common(split, opt);
  split->add_option("--train", train_list, "training problems")->delimiter(',');
  split->add_option("--test", test_list, "test problems")->delimiter(',');

  auto* ablate = app.add_subcommand("ablate", "compare the full method against one ablation");
  add_common(ablate, opt);
  ablate->add_option("--variant", variant, "no-state, aa, ca, r1, r2, r1r2 or no-train")->required();

  auto* curves = app.add_subcommand("export-curves", "normalized mean curves from trace files");
  add_common(curves, opt);
  curves->add_option("--input", inputs, "JSON-lines trace files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    rleceo::ExperimentConfig cfg = resolve(opt);
    if (level) cfg.static_level = *level;
    if (cp) cfg.cp = *cp;
    cfg.validate();
    const std::filesystem::path out = cfg.output_dir;

    if (*train) {
      const auto result = rleceo::train(cfg, cfg.problems);
      const std::filesystem::path path = checkpoint.empty() ? out / "checkpoint.ckpt" : std::filesystem::path(checkpoint);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      rleceo::save_checkpoint(result.checkpoint, path);
      rleceo::write_train_log(result.log, out / "train_log.jsonl");
      std::cout << "wrote " << path.string() << " after " << result.log.size() << " episodes\n";
    } else if (*evaluate) {
      const auto ckpt = rleceo::load_checkpoint(checkpoint);
      const auto records = rleceo::evaluate(ckpt, cfg, cfg.problems);
      const auto rows = rleceo::summarize(records);
      rleceo::write_table_csv(rows, out / "evaluate.csv");
      rleceo::write_traces_jsonl(records, out / "evaluate_traces.jsonl");
      report(rows);
    } else if (*base) {
      const auto records = rleceo::run_baseline(baseline, cfg, cfg.problems);
      const auto rows = rleceo::summarize(records);
      rleceo::write_table_csv(rows, out / ("baseline_" + baseline + ".csv"));
      rleceo::write_traces_jsonl(records, out / ("baseline_" + baseline + "_traces.jsonl"));
      report(rows);
    } else if (*loo) {
      const auto result = rleceo::leave_one_out(cfg);
      rleceo::write_protocol(result, out, "loo");
      report(rleceo::summarize(result.records));
    } else if (*split) {
      const auto& tr = train_list.empty() ? cfg.train_problems : train_list;
      const auto& te = test_list.empty() ? cfg.test_problems : test_list;
      const auto result = rleceo::split_protocol(cfg, tr, te);
      rleceo::write_protocol(result, out, "split");
      report(rleceo::summarize(result.records));
    } else if (*ablate) {
      const auto result = rleceo::ablate(cfg, variant);
      rleceo::write_protocol(result, out, "ablate_" + variant);
      report(rleceo::summarize(result.records));
    } else if (*curves) {
      std::vector<rleceo::RunRecord> records;
      for (const auto& in : inputs) {
        for (auto& r : rleceo::read_traces_jsonl(in)) records.push_back(std::move(r));
      }
      rleceo::export_curves(records, out);
      std::cout << "wrote " << (out / "curves.csv").string() << "\n";
    }
  } catch (const rleceo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rleceo::LookupError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
