#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "rleceo/cop.hpp"
#include "rleceo/error.hpp"
#include "rleceo/random.hpp"

namespace rleceo {

struct Individual {
  std::vector<double> x;
  Evaluation eval;
  double nu = 0.0;      // exact violation
  double nu_eps = 0.0;  // violation relaxed by the current epsilon

  SortKey key() const noexcept { return {eval.f, nu_eps}; }
};

struct Population {
  std::vector<Individual> members;
  std::vector<std::vector<double>> archive;
  std::size_t generation = 0;

  std::size_t size() const noexcept { return members.size(); }
};

struct SuccessHistory {
  static constexpr double kTerminalCr = -1.0;

  std::vector<double> mf;
  std::vector<double> mcr;
  std::size_t k = 0;

  explicit SuccessHistory(std::size_t memory_size = 5, double initial = 0.5)
      : mf(memory_size, initial), mcr(memory_size, initial) {
    if (memory_size == 0) throw ContractError("success history needs at least one slot");
  }
};

// One successful trial: the parameters that produced it and its improvement.
struct Success {
  double f = 0.0;
  double cr = 0.0;
  double weight = 0.0;
};

struct LshadeConfig {
  std::size_t pop_size = 50;
  std::size_t min_pop_size = 4;
  std::size_t memory_size = 5;
  double p_rate = 0.11;
  double archive_rate = 1.0;
  bool lpsr = false;
};

inline constexpr std::size_t kMinPopulation = 4;

inline Individual make_individual(std::vector<double> x, Evaluation eval) {
  Individual ind;
  ind.x = std::move(x);
  ind.eval = std::move(eval);
  ind.nu = violation(ind.eval);
  ind.nu_eps = ind.nu;
  return ind;
}

inline void refresh_relaxed(Population& pop, const EpsilonVector& eps) {
  for (auto& m : pop.members) m.nu_eps = relaxed_violation(m.eval, eps);
}

// Member indices from best to worst under the epsilon comparison; ties keep
// index order.
inline std::vector<std::size_t> ranked_indices(const Population& pop) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return eps_less(pop.members[a].key(), pop.members[b].key()); });
  return idx;
}

inline Population init_population(const ConstrainedProblem& problem, std::size_t n, Rng& rng, BudgetCounter& budget) {
  if (n < kMinPopulation) throw ContractError("population size must be at least 4");
  if (budget.remaining() < n) throw ContractError("budget cannot cover the initial population");
  Population pop;
  pop.members.reserve(n);
  const auto lo = problem.lower();
  const auto hi = problem.upper();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(problem.dim());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.uniform(lo[j], hi[j]);
    Evaluation e = evaluate_counted(problem, x, budget);
    pop.members.push_back(make_individual(std::move(x), std::move(e)));
  }
  return pop;
}

// v = x_i + F (x_pbest - x_i) + F (x_r1 - x_r2)
inline std::vector<double> current_to_pbest(std::span<const double> xi, std::span<const double> xpbest,
                                            std::span<const double> xr1, std::span<const double> xr2, double f) {
  std::vector<double> v(xi.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = xi[j] + f * (xpbest[j] - xi[j]) + f * (xr1[j] - xr2[j]);
  return v;
}

// `ranked` must come from ranked_indices(pop).
inline std::vector<double> mutate_current_to_pbest(std::size_t i, const Population& pop,
                                                   std::span<const std::size_t> ranked, double f, double p_rate,
                                                   Rng& rng) {
  const std::size_t n = pop.size();
  if (n < kMinPopulation) throw ContractError("current-to-pbest needs at least 4 members");
  const auto top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p_rate * static_cast<double>(n))));
  const std::size_t pbest = ranked[rng.index(std::min(top, n))];

  std::size_t r1 = rng.index(n);
  while (r1 == i) r1 = rng.index(n);

  const std::size_t pool = n + pop.archive.size();
  std::size_t r2 = rng.index(pool);
  while (r2 == i || r2 == r1) r2 = rng.index(pool);
  const auto& x_r2 = r2 < n ? pop.members[r2].x : pop.archive[r2 - n];

  return current_to_pbest(pop.members[i].x, pop.members[pbest].x, pop.members[r1].x, x_r2, f);
}

// Out-of-range components move halfway from the parent to the violated bound.
inline void repair_bounds(std::vector<double>& u, std::span<const double> parent, std::span<const double> lower,
                          std::span<const double> upper) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] < lower[j]) u[j] = (parent[j] + lower[j]) / 2.0;
    if (u[j] > upper[j]) u[j] = (parent[j] + upper[j]) / 2.0;
  }
}

inline std::vector<double> crossover_binomial(std::span<const double> xi, std::span<const double> v, double cr,
                                              std::span<const double> lower, std::span<const double> upper,
                                              Rng& rng) {
  const std::size_t jrand = rng.index(xi.size());
  std::vector<double> u(xi.begin(), xi.end());
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (j == jrand || rng.uniform() < cr) u[j] = v[j];
  }
  repair_bounds(u, xi, lower, upper);
  return u;
}

struct SelectionOutcome {
  bool trial_wins = false;
  // Improvement in the comparison key: violation decrease when relaxed
  // violations differ, objective decrease otherwise.
  double weight = 0.0;
};

inline SelectionOutcome select(const Individual& parent, const Individual& trial) {
  if (eps_compare(trial.key(), parent.key()) != Ordering::first_better) return {};
  const double w = trial.nu_eps != parent.nu_eps ? parent.nu_eps - trial.nu_eps : parent.eval.f - trial.eval.f;
  return {true, w};
}

inline void update_memory(SuccessHistory& hist, std::span<const Success> successes) {
  if (successes.empty()) return;
  double wsum = 0.0;
  for (const auto& s : successes) wsum += s.weight;
  double f_num = 0.0;
  double f_den = 0.0;
  double cr_mean = 0.0;
  double cr_max = 0.0;
  for (const auto& s : successes) {
    const double w = wsum > 0.0 ? s.weight / wsum : 1.0 / static_cast<double>(successes.size());
    f_num += w * s.f * s.f;
    f_den += w * s.f;
    cr_mean += w * s.cr;
    cr_max = std::max(cr_max, s.cr);
  }
  hist.mf[hist.k] = f_num / f_den;
  if (hist.mcr[hist.k] == SuccessHistory::kTerminalCr || cr_max == 0.0) {
    hist.mcr[hist.k] = SuccessHistory::kTerminalCr;
  } else {
    hist.mcr[hist.k] = cr_mean;
  }
  hist.k = (hist.k + 1) % hist.mf.size();
}

struct ControlParameters {
  double f = 0.5;
  double cr = 0.5;
};

inline ControlParameters sample_parameters(const SuccessHistory& hist, Rng& rng) {
  const std::size_t r = rng.index(hist.mf.size());
  double f = rng.cauchy(hist.mf[r], 0.1);
  while (f <= 0.0) f = rng.cauchy(hist.mf[r], 0.1);
  f = std::min(f, 1.0);
  double cr = 0.0;
  if (hist.mcr[r] != SuccessHistory::kTerminalCr) cr = std::clamp(rng.normal(hist.mcr[r], 0.1), 0.0, 1.0);
  return {f, cr};
}

// Linear population size reduction target.
inline std::size_t lpsr_target(std::size_t fes, std::size_t maxfes, std::size_t n_init, std::size_t n_min) {
  const double frac = maxfes == 0 ? 1.0 : static_cast<double>(fes) / static_cast<double>(maxfes);
  const double n = static_cast<double>(n_init) - static_cast<double>(n_init - n_min) * std::min(frac, 1.0);
  return static_cast<std::size_t>(std::lround(n));
}

inline void trim_archive(Population& pop, std::size_t cap, Rng& rng) {
  while (pop.archive.size() > cap) {
    const std::size_t victim = rng.index(pop.archive.size());
    pop.archive[victim] = std::move(pop.archive.back());
    pop.archive.pop_back();
  }
}

// Drops the worst members under the epsilon comparison.
inline void shrink_population(Population& pop, std::size_t target, Rng& rng) {
  target = std::max(target, kMinPopulation);
  if (target >= pop.size()) return;
  const auto ranked = ranked_indices(pop);
  std::vector<Individual> kept;
  kept.reserve(target);
  std::vector<std::size_t> keep(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(target));
  std::sort(keep.begin(), keep.end());
  for (auto i : keep) kept.push_back(std::move(pop.members[i]));
  pop.members = std::move(kept);
  trim_archive(pop, target, rng);
}

struct GenerationResult {
  std::size_t evaluations = 0;
  std::size_t successes = 0;
  bool terminal = false;  // budget exhausted
};

// Called with every freshly evaluated trial.
using EvaluationObserver = std::function<void(const Individual&)>;

inline GenerationResult generation_step(const ConstrainedProblem& problem, Population& pop, const EpsilonVector& eps,
                                        SuccessHistory& hist, const LshadeConfig& cfg, Rng& rng,
                                        BudgetCounter& budget, const EvaluationObserver& observer = {}) {
  if (budget.exhausted()) throw ContractError("generation_step called with an exhausted budget");
  refresh_relaxed(pop, eps);
  const auto ranked = ranked_indices(pop);
  const std::size_t n = pop.size();

  struct Pending {
    std::size_t parent;
    ControlParameters params;
    Individual trial;
  };
  std::vector<Pending> trials;
  trials.reserve(n);
  for (std::size_t i = 0; i < n && !budget.exhausted(); ++i) {
    const ControlParameters cp = sample_parameters(hist, rng);
    const auto v = mutate_current_to_pbest(i, pop, ranked, cp.f, cfg.p_rate, rng);
    auto u = crossover_binomial(pop.members[i].x, v, cp.cr, problem.lower(), problem.upper(), rng);
    Evaluation e = evaluate_counted(problem, u, budget);
    Individual trial = make_individual(std::move(u), std::move(e));
    trial.nu_eps = relaxed_violation(trial.eval, eps);
    if (observer) observer(trial);
    trials.push_back({i, cp, std::move(trial)});
  }

  GenerationResult result;
  result.evaluations = trials.size();
  std::vector<Success> successes;
  for (auto& t : trials) {
    Individual& parent = pop.members[t.parent];
    const SelectionOutcome outcome = select(parent, t.trial);
    if (!outcome.trial_wins) continue;
    successes.push_back({t.params.f, t.params.cr, outcome.weight});
    pop.archive.push_back(std::move(parent.x));
    parent = std::move(t.trial);
  }
  trim_archive(pop, static_cast<std::size_t>(std::lround(cfg.archive_rate * static_cast<double>(n))), rng);
  update_memory(hist, successes);
  if (cfg.lpsr) {
    shrink_population(pop, lpsr_target(budget.fes(), budget.maxfes(), cfg.pop_size, cfg.min_pop_size), rng);
  }
  refresh_relaxed(pop, eps);
  ++pop.generation;
  result.successes = successes.size();
  result.terminal = budget.exhausted();
  return result;
}

// Run-level bookkeeping over every evaluated candidate.
struct RunBest {
  double best_sco = std::numeric_limits<double>::infinity();
  double best_feasible_f = std::numeric_limits<double>::infinity();
  double accuracy = kDefaultAccuracy;

  void record(const Evaluation& e) {
    best_sco = std::min(best_sco, sco(e, accuracy));
    if (is_feasible(e, accuracy)) best_feasible_f = std::min(best_feasible_f, e.f);
  }
};

// One optimizer run: owns its population, memory, random stream and budget.
class LshadeRun {
 public:
  LshadeRun(const ConstrainedProblem& problem, LshadeConfig cfg, std::size_t maxfes, std::uint64_t seed,
            double accuracy = kDefaultAccuracy)
      : problem_(&problem), cfg_(cfg), rng_(seed), budget_(maxfes), hist_(cfg.memory_size) {
    best_.accuracy = accuracy;
    pop_ = init_population(problem, cfg_.pop_size, rng_, budget_);
    for (const auto& m : pop_.members) best_.record(m.eval);
  }

  GenerationResult step(const EpsilonVector& eps) {
    return generation_step(*problem_, pop_, eps, hist_, cfg_, rng_, budget_,
                           [this](const Individual& ind) { best_.record(ind.eval); });
  }

  const ConstrainedProblem& problem() const noexcept { return *problem_; }
  const Population& population() const noexcept { return pop_; }
  const SuccessHistory& history() const noexcept { return hist_; }
  const BudgetCounter& budget() const noexcept { return budget_; }
  const RunBest& best() const noexcept { return best_; }
  const LshadeConfig& config() const noexcept { return cfg_; }

 private:
  const ConstrainedProblem* problem_;
  LshadeConfig cfg_;
  Rng rng_;
  BudgetCounter budget_;
  SuccessHistory hist_;
  Population pop_;
  RunBest best_;
};

}  // namespace rleceo
