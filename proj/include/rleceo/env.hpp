#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rleceo/cop.hpp"
#include "rleceo/error.hpp"
#include "rleceo/features.hpp"
#include "rleceo/lshade.hpp"

namespace rleceo {

inline constexpr double kDefaultDelta = 1e-3;

enum class ActionScheme { exponential, linear_aa, linear_ca };

inline std::string to_string(ActionScheme s) {
  switch (s) {
    case ActionScheme::exponential: return "exponential";
    case ActionScheme::linear_aa: return "aa";
    case ActionScheme::linear_ca: return "ca";
  }
  return "?";
}

inline ActionScheme parse_action_scheme(const std::string& text) {
  if (text == "exponential") return ActionScheme::exponential;
  if (text == "aa") return ActionScheme::linear_aa;
  if (text == "ca") return ActionScheme::linear_ca;
  throw ConfigError("unknown action scheme '" + text + "' (valid: exponential, aa, ca)");
}

enum class RewardVariant { full, r1, r2, r1r2 };

inline std::string to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::full: return "full";
    case RewardVariant::r1: return "r1";
    case RewardVariant::r2: return "r2";
    case RewardVariant::r1r2: return "r1+r2";
  }
  return "?";
}

inline RewardVariant parse_reward_variant(const std::string& text) {
  if (text == "full") return RewardVariant::full;
  if (text == "r1") return RewardVariant::r1;
  if (text == "r2") return RewardVariant::r2;
  if (text == "r1+r2" || text == "r1r2") return RewardVariant::r1r2;
  throw ConfigError("unknown reward variant '" + text + "' (valid: full, r1, r2, r1+r2)");
}

struct ActionSpace {
  ActionScheme scheme = ActionScheme::exponential;
  std::vector<double> levels;

  static ActionSpace make(ActionScheme scheme) {
    ActionSpace a;
    a.scheme = scheme;
    switch (scheme) {
      case ActionScheme::exponential:
        for (int i = 0; i <= 10; ++i) a.levels.push_back(i / 10.0);
        break;
      case ActionScheme::linear_aa:
        for (int e = -3; e <= 3; ++e) a.levels.push_back(std::pow(10.0, e));
        break;
      case ActionScheme::linear_ca:
        for (int i = -5; i <= 5; ++i) a.levels.push_back(i / 20.0);
        break;
    }
    return a;
  }

  std::size_t size() const noexcept { return levels.size(); }

  // Position of an action in [0, 1]; this is what the state reports as the
  // previous action. Equals the level itself for the exponential scheme.
  double normalized(std::size_t index) const {
    if (index >= levels.size()) throw ContractError("action index out of range");
    return static_cast<double>(index) / static_cast<double>(levels.size() - 1);
  }
};

class EpsilonBase {
 public:
  // Entries below delta are floored at delta.
  EpsilonBase(std::vector<double> base, double delta = kDefaultDelta) : delta_(delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ContractError("delta must be positive");
    for (double& b : base) {
      if (!std::isfinite(b) || b < 0.0) throw ContractError("epsilon base entries must be finite and >= 0");
      b = std::max(b, delta);
    }
    base_ = std::move(base);
  }

  // Mean per-constraint violation over the population.
  static EpsilonBase from_population(const Population& pop, std::size_t num_constraints, double delta = kDefaultDelta) {
    if (pop.members.empty()) throw ContractError("epsilon base needs a non-empty population");
    std::vector<double> base(num_constraints, 0.0);
    for (const auto& m : pop.members) {
      for (std::size_t i = 0; i < num_constraints; ++i) base[i] += constraint_violation(m.eval, i);
    }
    for (double& b : base) b /= static_cast<double>(pop.size());
    return EpsilonBase(std::move(base), delta);
  }

  std::span<const double> values() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.size(); }
  double operator[](std::size_t i) const { return base_[i]; }
  double delta() const noexcept { return delta_; }

 private:
  std::vector<double> base_;
  double delta_;
};

// eps_i = base_i^a * delta^(1-a), evaluated as delta * (base_i/delta)^a so the
// endpoints are exact and the result stays monotone in a.
inline EpsilonVector epsilon_from_action(double a, const EpsilonBase& base) {
  if (!(a >= 0.0 && a <= 1.0)) throw ContractError("action level must lie in [0, 1]");
  const double delta = base.delta();
  std::vector<double> eps(base.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double b = base[i];
    if (a == 0.0) {
      eps[i] = delta;
    } else if (a == 1.0) {
      eps[i] = b;
    } else {
      eps[i] = std::clamp(delta * std::pow(b / delta, a), delta, b);
    }
  }
  return EpsilonVector(std::move(eps));
}

// eps_t = eps_{t-1} * (1 - a), kept inside [0, base].
inline EpsilonVector epsilon_linear_variant(const EpsilonVector& prev, double a, const EpsilonBase& base) {
  if (prev.size() != base.size()) throw ContractError("epsilon length does not match epsilon base");
  std::vector<double> eps(prev.size());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = std::clamp(prev[i] * (1.0 - a), 0.0, base[i]);
  return EpsilonVector(std::move(eps));
}

struct RewardState {
  double f_gbest_0 = 0.0;
  double f_gbest_prev = 0.0;
  double f_gbest_now = 0.0;
  double f_agentbest = std::numeric_limits<double>::infinity();
  double nu_top5_0 = 0.0;
  double nu_top5_prev = 0.0;
  double nu_top5_now = 0.0;
};

struct RewardTerms {
  double r1 = 0.0;
  double r2 = 0.0;
  double gamma = 0.0;
  double reward = 0.0;
};

// Assumes f_agentbest already includes f_gbest_now.
inline RewardTerms compute_reward(const RewardState& rs, RewardVariant variant = RewardVariant::full) {
  RewardTerms t;
  const double obj_den = rs.f_gbest_0 - rs.f_agentbest;
  t.r1 = obj_den > 1e-12 ? (rs.f_gbest_prev - rs.f_gbest_now) / obj_den : 0.0;
  if (rs.nu_top5_0 > 0.0) {
    t.r2 = std::max(0.0, (rs.nu_top5_prev - rs.nu_top5_now) / rs.nu_top5_0);
    t.gamma = std::clamp(rs.nu_top5_now / rs.nu_top5_0, 0.0, 1.0);
  }
  double r = 0.0;
  switch (variant) {
    case RewardVariant::full: r = (t.r1 * (1.0 - t.gamma) + t.r2) / 2.0; break;
    case RewardVariant::r1: r = t.r1; break;
    case RewardVariant::r2: r = t.r2; break;
    case RewardVariant::r1r2: r = t.r1 + t.r2; break;
  }
  t.reward = std::clamp(r, 0.0, 1.0);
  return t;
}

struct Transition {
  StateVector s{};
  std::size_t action = 0;
  double reward = 0.0;
  StateVector next{};
  bool terminal = false;
};

inline constexpr std::size_t kNoAction = static_cast<std::size_t>(-1);

struct EnvConfig {
  std::size_t maxfes = 500;
  ActionScheme scheme = ActionScheme::exponential;
  RewardVariant reward = RewardVariant::full;
  double delta = kDefaultDelta;
  double accuracy = kDefaultAccuracy;
  bool mask_state = false;
  LshadeConfig lshade;
};

struct StepInfo {
  double level = 0.0;  // normalized action level reported as S9
  double eps_min = 0.0;
  double eps_mean = 0.0;
  double eps_max = 0.0;
  RewardTerms reward;
  std::size_t fes = 0;
  double best_sco = 0.0;
};

struct StepResult {
  Transition transition;
  StepInfo info;
};

// One generation of the optimizer per meta-step.
class MetaEnv {
 public:
  MetaEnv(const ConstrainedProblem& problem, EnvConfig cfg,
          double f_agentbest = std::numeric_limits<double>::infinity())
      : problem_(&problem), cfg_(cfg), actions_(ActionSpace::make(cfg.scheme)), f_agentbest_(f_agentbest) {
    if (cfg_.maxfes < cfg_.lshade.pop_size) throw ContractError("budget smaller than the population");
  }

  StateVector reset(std::uint64_t seed) {
    run_ = std::make_unique<LshadeRun>(*problem_, cfg_.lshade, cfg_.maxfes, seed, cfg_.accuracy);
    const auto& pop = run_->population();
    base_ = EpsilonBase::from_population(pop, problem_->num_constraints(), cfg_.delta);
    eps_ = EpsilonVector(std::vector<double>(base_->values().begin(), base_->values().end()));
    history_ = start_history(pop, run_->budget(), 1.0);
    reward_state_ = RewardState{};
    reward_state_.f_gbest_0 = history_.f_gbest;
    reward_state_.f_gbest_prev = history_.f_gbest;
    reward_state_.f_gbest_now = history_.f_gbest;
    reward_state_.f_agentbest = f_agentbest_;
    reward_state_.nu_top5_0 = history_.nu_top5_0;
    reward_state_.nu_top5_prev = history_.nu_top5_0;
    reward_state_.nu_top5_now = history_.nu_top5_0;
    steps_ = 0;
    terminal_ = false;
    state_ = observe();
    return state_;
  }

  // Agent path: epsilon from the active action scheme.
  StepResult step(std::size_t action) {
    require_running();
    if (action >= actions_.size()) throw ContractError("action index out of range");
    const double a = actions_.levels[action];
    EpsilonVector eps = actions_.scheme == ActionScheme::exponential ? epsilon_from_action(a, *base_)
                                                                     : epsilon_linear_variant(eps_, a, *base_);
    StepResult r = advance(std::move(eps), actions_.normalized(action));
    r.transition.action = action;
    return r;
  }

  // Baseline path: caller supplies epsilon and the level reported as S9.
  StepResult step_with(EpsilonVector eps, double level) {
    require_running();
    if (eps.size() != problem_->num_constraints()) throw ContractError("epsilon length mismatch");
    return advance(std::move(eps), std::clamp(level, 0.0, 1.0));
  }

  bool terminal() const noexcept { return terminal_; }
  std::size_t steps() const noexcept { return steps_; }
  const StateVector& state() const noexcept { return state_; }
  const EpsilonBase& eps_base() const { return *base_; }
  const EpsilonVector& epsilon() const noexcept { return eps_; }
  const ActionSpace& actions() const noexcept { return actions_; }
  const LshadeRun& run() const { return *run_; }
  const RunHistory& history() const noexcept { return history_; }
  const ConstrainedProblem& problem() const noexcept { return *problem_; }
  const EnvConfig& config() const noexcept { return cfg_; }
  double f_agentbest() const noexcept { return f_agentbest_; }
  double best_sco() const { return run_->best().best_sco; }
  std::size_t fes() const { return run_->budget().fes(); }

 private:
  void require_running() const {
    if (!run_) throw ContractError("environment has not been reset");
    if (terminal_) throw ContractError("cannot step a terminal episode");
  }

  StateVector observe() const {
    StateVector s = extract_state(run_->population(), history_, problem_->lower(), problem_->upper(), cfg_.accuracy);
    return cfg_.mask_state ? mask_constraint_features(s) : s;
  }

  StepResult advance(EpsilonVector eps, double level) {
    StepResult out;
    out.transition.s = state_;
    out.transition.action = kNoAction;

    eps_ = std::move(eps);
    run_->step(eps_);
    ++steps_;
    const auto& pop = run_->population();
    advance_history(history_, pop, run_->budget(), level);

    reward_state_.f_gbest_prev = reward_state_.f_gbest_now;
    reward_state_.f_gbest_now = history_.f_gbest;
    f_agentbest_ = std::min(f_agentbest_, history_.f_gbest);
    reward_state_.f_agentbest = f_agentbest_;
    reward_state_.nu_top5_prev = reward_state_.nu_top5_now;
    reward_state_.nu_top5_now = history_.nu_top5_now;
    const RewardTerms terms = compute_reward(reward_state_, cfg_.reward);

    // An episode ends once the remaining budget cannot cover a full generation.
    terminal_ = run_->budget().remaining() < pop.size();
    state_ = observe();

    out.transition.reward = terms.reward;
    out.transition.next = state_;
    out.transition.terminal = terminal_;
    out.info.level = level;
    out.info.eps_min = eps_.min();
    out.info.eps_mean = eps_.mean();
    out.info.eps_max = eps_.max();
    out.info.reward = terms;
    out.info.fes = run_->budget().fes();
    out.info.best_sco = run_->best().best_sco;
    return out;
  }

  const ConstrainedProblem* problem_;
  EnvConfig cfg_;
  ActionSpace actions_;
  double f_agentbest_;
  std::unique_ptr<LshadeRun> run_;
  std::optional<EpsilonBase> base_;
  EpsilonVector eps_;
  RunHistory history_;
  RewardState reward_state_;
  StateVector state_{};
  std::size_t steps_ = 0;
  bool terminal_ = false;
};

}  // namespace rleceo
