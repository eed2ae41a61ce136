#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rleceo/error.hpp"

namespace rleceo {

// Accuracy level at which a constraint counts as satisfied when scoring.
inline constexpr double kDefaultAccuracy = 1e-3;

struct Evaluation {
  double f = 0.0;
  std::vector<double> g;  // inequality values, satisfied when <= 0
  std::vector<double> h;  // equality values, satisfied when == 0
};

// Per-constraint relaxation thresholds, inequalities first.
class EpsilonVector {
 public:
  EpsilonVector() = default;

  explicit EpsilonVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) throw ContractError("epsilon entries must be finite and >= 0");
    }
  }

  static EpsilonVector zeros(std::size_t m) { return EpsilonVector(std::vector<double>(m, 0.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }
  double max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }
  double mean() const {
    if (values_.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum / static_cast<double>(values_.size());
  }

  friend bool operator==(const EpsilonVector&, const EpsilonVector&) = default;

 private:
  std::vector<double> values_;
};

using Evaluator = std::function<Evaluation(std::span<const double>)>;

class ConstrainedProblem {
 public:
  ConstrainedProblem(std::string name, std::vector<double> lower, std::vector<double> upper,
                     std::size_t num_inequality, std::size_t num_equality, Evaluator evaluator,
                     std::optional<std::vector<double>> certified_feasible = std::nullopt)
      : name_(std::move(name)),
        lower_(std::move(lower)),
        upper_(std::move(upper)),
        p_(num_inequality),
        q_(num_equality),
        evaluator_(std::move(evaluator)),
        certified_(std::move(certified_feasible)) {
    if (lower_.empty()) throw ContractError(name_ + ": dimension must be positive");
    if (lower_.size() != upper_.size()) throw ContractError(name_ + ": bound lengths differ");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      if (!(lower_[i] < upper_[i])) throw ContractError(name_ + ": lower bound must be below upper bound");
    }
    if (!evaluator_) throw ContractError(name_ + ": missing evaluator");
    if (certified_ && !in_bounds(*certified_)) {
      throw ContractError(name_ + ": certified feasible point is out of bounds");
    }
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return lower_.size(); }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }
  std::size_t num_inequality() const noexcept { return p_; }
  std::size_t num_equality() const noexcept { return q_; }
  std::size_t num_constraints() const noexcept { return p_ + q_; }
  const std::optional<std::vector<double>>& certified_feasible_point() const noexcept { return certified_; }

  bool in_bounds(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    }
    return true;
  }

  // Out-of-bounds points are refused; repair belongs to the optimizer.
  Evaluation evaluate(std::span<const double> x) const {
    if (x.size() != dim()) throw ContractError(name_ + ": candidate has wrong dimension");
    if (!in_bounds(x)) throw ContractError(name_ + ": candidate is out of bounds");
    Evaluation e = evaluator_(x);
    if (e.g.size() != p_ || e.h.size() != q_) {
      throw ProblemDefinitionError(name_ + ": evaluator returned the wrong number of constraints");
    }
    if (!std::isfinite(e.f)) throw ProblemDefinitionError(name_ + ": non-finite objective");
    for (double v : e.g) {
      if (!std::isfinite(v)) throw ProblemDefinitionError(name_ + ": non-finite inequality value");
    }
    for (double v : e.h) {
      if (!std::isfinite(v)) throw ProblemDefinitionError(name_ + ": non-finite equality value");
    }
    return e;
  }

 private:
  std::string name_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::size_t p_;
  std::size_t q_;
  Evaluator evaluator_;
  std::optional<std::vector<double>> certified_;
};

class BudgetCounter {
 public:
  explicit BudgetCounter(std::size_t maxfes) : maxfes_(maxfes) {}

  std::size_t fes() const noexcept { return fes_; }
  std::size_t maxfes() const noexcept { return maxfes_; }
  std::size_t remaining() const noexcept { return maxfes_ - fes_; }
  bool exhausted() const noexcept { return fes_ >= maxfes_; }

  void consume() {
    if (fes_ >= maxfes_) throw BudgetExhausted("evaluation budget exhausted");
    ++fes_;
  }

 private:
  std::size_t fes_ = 0;
  std::size_t maxfes_;
};

inline Evaluation evaluate_counted(const ConstrainedProblem& problem, std::span<const double> x,
                                   BudgetCounter& budget) {
  budget.consume();
  return problem.evaluate(x);
}

namespace detail {

inline double checked(double v) {
  if (!std::isfinite(v)) throw ProblemDefinitionError("non-finite constraint value");
  return v;
}

}  // namespace detail

// Contribution of constraint `index` (inequalities first) to the total violation.
inline double constraint_violation(const Evaluation& e, std::size_t index) {
  if (index < e.g.size()) return std::max(detail::checked(e.g[index]), 0.0);
  index -= e.g.size();
  if (index < e.h.size()) return std::abs(detail::checked(e.h[index]));
  throw ContractError("constraint index out of range");
}

inline double violation(const Evaluation& e) {
  double total = 0.0;
  for (double g : e.g) total += std::max(detail::checked(g), 0.0);
  for (double h : e.h) total += std::abs(detail::checked(h));
  return total;
}

// A per-constraint violation exactly equal to its threshold is zeroed.
inline double relaxed_violation(const Evaluation& e, const EpsilonVector& eps) {
  if (eps.size() != e.g.size() + e.h.size()) {
    throw ContractError("epsilon length does not match the number of constraints");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < e.g.size(); ++i) {
    const double g = detail::checked(e.g[i]);
    if (g > eps[i]) total += g;
  }
  for (std::size_t j = 0; j < e.h.size(); ++j) {
    const double a = std::abs(detail::checked(e.h[j]));
    if (a > eps[e.g.size() + j]) total += a;
  }
  return total;
}

// Comparison key: relaxed violation first, objective second.
struct SortKey {
  double f = 0.0;
  double nu = 0.0;
};

enum class Ordering { first_better, second_better, tie };

inline Ordering eps_compare(SortKey a, SortKey b) noexcept {
  if (a.nu < b.nu) return Ordering::first_better;
  if (b.nu < a.nu) return Ordering::second_better;
  if (a.f < b.f) return Ordering::first_better;
  if (b.f < a.f) return Ordering::second_better;
  return Ordering::tie;
}

inline bool eps_less(SortKey a, SortKey b) noexcept { return eps_compare(a, b) == Ordering::first_better; }

inline bool is_feasible(const Evaluation& e, double accuracy = kDefaultAccuracy) {
  for (double g : e.g) {
    if (!(g <= accuracy)) return false;
  }
  for (double h : e.h) {
    if (!(std::abs(h) <= accuracy)) return false;
  }
  return true;
}

inline double sco(const Evaluation& e, double accuracy = kDefaultAccuracy) {
  if (is_feasible(e, accuracy)) return e.f;
  return e.f + violation(e);
}

}  // namespace rleceo
