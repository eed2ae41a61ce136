#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rleceo/cop.hpp"
#include "rleceo/error.hpp"
#include "rleceo/lshade.hpp"

namespace rleceo {

inline constexpr std::size_t kStateSize = 10;

using StateVector = std::array<double, kStateSize>;

// Mean of the k = min(5, N) smallest values.
inline double top5_mean(std::span<const double> values) {
  if (values.empty()) throw ContractError("top5 mean of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t k = std::min<std::size_t>(5, v.size());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += v[i];
  return sum / static_cast<double>(k);
}

// Uses exact (unrelaxed) violations.
inline double top5_violation_mean(const Population& pop) {
  std::vector<double> nu;
  nu.reserve(pop.size());
  for (const auto& m : pop.members) nu.push_back(m.nu);
  return top5_mean(nu);
}

struct RunHistory {
  double f_gbest = 0.0;
  double f_max = 0.0;
  double f_pbest_0 = 0.0;
  double f_pbest_now = 0.0;
  double nu_top5_0 = 0.0;
  double nu_top5_prev = 0.0;
  double nu_top5_now = 0.0;
  double prev_action = 1.0;
  std::size_t fes = 0;
  std::size_t maxfes = 1;
};

namespace detail {

inline double population_min_f(const Population& pop) {
  double best = pop.members.front().eval.f;
  for (const auto& m : pop.members) best = std::min(best, m.eval.f);
  return best;
}

inline double population_max_f(const Population& pop) {
  double worst = pop.members.front().eval.f;
  for (const auto& m : pop.members) worst = std::max(worst, m.eval.f);
  return worst;
}

}  // namespace detail

inline RunHistory start_history(const Population& pop, const BudgetCounter& budget, double initial_action = 1.0) {
  if (pop.members.empty()) throw ContractError("history needs a non-empty population");
  RunHistory h;
  h.f_gbest = detail::population_min_f(pop);
  h.f_max = detail::population_max_f(pop);
  h.f_pbest_0 = h.f_gbest;
  h.f_pbest_now = h.f_gbest;
  h.nu_top5_0 = top5_violation_mean(pop);
  h.nu_top5_prev = h.nu_top5_0;
  h.nu_top5_now = h.nu_top5_0;
  h.prev_action = initial_action;
  h.fes = budget.fes();
  h.maxfes = budget.maxfes();
  return h;
}

inline void advance_history(RunHistory& h, const Population& pop, const BudgetCounter& budget, double action) {
  if (pop.members.empty()) throw ContractError("history needs a non-empty population");
  h.f_pbest_now = detail::population_min_f(pop);
  h.f_gbest = std::min(h.f_gbest, h.f_pbest_now);
  h.f_max = std::max(h.f_max, detail::population_max_f(pop));
  h.nu_top5_prev = h.nu_top5_now;
  h.nu_top5_now = top5_violation_mean(pop);
  h.prev_action = action;
  h.fes = budget.fes();
  h.maxfes = budget.maxfes();
}

namespace detail {

inline std::pair<double, double> mean_std(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::sqrt(var)};
}

}  // namespace detail

// Fraction of unordered pairs whose objective and violation differences share
// a sign. Pairs with equal violation count as zero.
inline double tradeoff_fraction(std::span<const double> f, std::span<const double> nu) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  std::size_t positive = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dnu = nu[i] - nu[j];
      const double df = f[i] - f[j];
      if (dnu != 0.0 && ((df > 0.0 && dnu > 0.0) || (df < 0.0 && dnu < 0.0))) ++positive;
    }
  }
  return static_cast<double>(positive) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

inline StateVector extract_state(const Population& pop, const RunHistory& hist, std::span<const double> lower,
                                 std::span<const double> upper, double accuracy = kDefaultAccuracy) {
  if (pop.members.empty()) throw ContractError("cannot extract a state from an empty population");
  const std::size_t n = pop.size();
  StateVector s{};

  std::vector<double> coords;
  coords.reserve(n * lower.size());
  for (const auto& m : pop.members) {
    for (std::size_t j = 0; j < m.x.size(); ++j) coords.push_back((m.x[j] - lower[j]) / (upper[j] - lower[j]));
  }
  const auto [coord_mean, coord_std] = detail::mean_std(coords);
  s[0] = coord_std;
  s[2] = coord_mean;

  const double range = hist.f_max - hist.f_gbest;
  if (range > 0.0) {
    std::vector<double> nf;
    nf.reserve(n);
    for (const auto& m : pop.members) nf.push_back((m.eval.f - hist.f_gbest) / range);
    const auto [f_mean, f_std] = detail::mean_std(nf);
    s[1] = f_std;
    s[3] = f_mean;
  }

  const double pbest = detail::population_min_f(pop);
  s[4] = std::abs(hist.f_pbest_0) < 1e-12 ? 1.0 : std::clamp(pbest / hist.f_pbest_0, -10.0, 10.0);

  s[5] = hist.nu_top5_0 > 0.0 ? top5_violation_mean(pop) / hist.nu_top5_0 : 0.0;

  std::size_t feasible = 0;
  for (const auto& m : pop.members) feasible += is_feasible(m.eval, accuracy) ? 1 : 0;
  s[6] = static_cast<double>(feasible) / static_cast<double>(n);

  s[7] = hist.maxfes == 0 ? 0.0 : static_cast<double>(hist.fes) / static_cast<double>(hist.maxfes);
  s[8] = hist.prev_action;

  std::vector<double> f;
  std::vector<double> nu;
  f.reserve(n);
  nu.reserve(n);
  for (const auto& m : pop.members) {
    f.push_back(m.eval.f);
    nu.push_back(m.nu);
  }
  s[9] = tradeoff_fraction(f, nu);
  return s;
}

// Zeroes the constraint-profiling features S6, S7, S9 and S10.
inline StateVector mask_constraint_features(StateVector s) noexcept {
  s[5] = 0.0;
  s[6] = 0.0;
  s[8] = 0.0;
  s[9] = 0.0;
  return s;
}

}  // namespace rleceo
