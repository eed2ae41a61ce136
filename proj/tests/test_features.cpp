#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rleceo/features.hpp"
#include "rleceo/problems.hpp"

using namespace rleceo;

namespace {

Population population_of(const std::vector<std::vector<double>>& xs, const std::vector<Evaluation>& evals) {
  Population pop;
  for (std::size_t i = 0; i < xs.size(); ++i) pop.members.push_back(make_individual(xs[i], evals[i]));
  return pop;
}

Population random_population(Rng& rng, std::size_t n, std::size_t d, double lo, double hi) {
  Population pop;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(lo, hi);
    Evaluation e{rng.uniform(-50, 50), {rng.uniform(-2, 2)}, {rng.uniform(-2, 2)}};
    pop.members.push_back(make_individual(std::move(x), std::move(e)));
  }
  return pop;
}

}  // namespace

TEST(Top5, Examples) {
  EXPECT_EQ(top5_mean(std::vector<double>{0, 0, 0, 0, 0, 7}), 0.0);
  EXPECT_EQ(top5_mean(std::vector<double>{1, 2, 3, 4, 5, 100}), 3.0);
  EXPECT_EQ(top5_mean(std::vector<double>{3, 6, 9}), 6.0);
  EXPECT_THROW(top5_mean(std::vector<double>{}), ContractError);
}

TEST(Top5, UsesExactViolation) {
  Population pop = population_of({{0}, {0}}, {Evaluation{0, {2.0}, {}}, Evaluation{0, {4.0}, {}}});
  refresh_relaxed(pop, EpsilonVector({10.0}));
  EXPECT_EQ(top5_violation_mean(pop), 3.0);
}

TEST(Tradeoff, Examples) {
  EXPECT_EQ(tradeoff_fraction(std::vector<double>{1, 2}, std::vector<double>{0.5, 1.0}), 1.0);
  EXPECT_EQ(tradeoff_fraction(std::vector<double>{1, 2}, std::vector<double>{1.0, 0.5}), 0.0);
  EXPECT_EQ(tradeoff_fraction(std::vector<double>{1, 2}, std::vector<double>{1.0, 1.0}), 0.0);
}

TEST(Tradeoff, SymmetricAndBounded) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.index(20);
    std::vector<double> f(n), nu(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = std::round(rng.uniform(-3, 3));
      nu[i] = std::round(rng.uniform(0, 3));
    }
    const double s = tradeoff_fraction(f, nu);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    std::vector<double> fp(n), np(n);
    for (std::size_t i = 0; i < n; ++i) {
      fp[i] = f[perm[i]];
      np[i] = nu[perm[i]];
    }
    EXPECT_EQ(tradeoff_fraction(fp, np), s);
  }
}

TEST(State, InitialConventions) {
  const ConstrainedProblem p = registry_lookup("cec12", 10);
  Rng rng(1);
  BudgetCounter budget(500);
  const Population pop = init_population(p, 50, rng, budget);
  const RunHistory h = start_history(pop, budget);
  const StateVector s = extract_state(pop, h, p.lower(), p.upper());
  EXPECT_EQ(s[8], 1.0);
  EXPECT_DOUBLE_EQ(s[7], 50.0 / 500.0);
  EXPECT_GT(h.nu_top5_0, 0.0);
  EXPECT_DOUBLE_EQ(s[5], 1.0);
  EXPECT_DOUBLE_EQ(s[4], 1.0);
}

TEST(State, AllFeasibleGivesOne) {
  const Population pop = population_of({{0.1}, {0.2}, {0.3}}, {Evaluation{1, {-1}, {0}}, Evaluation{2, {-2}, {0}},
                                                                Evaluation{3, {0}, {5e-4}}});
  BudgetCounter b(10);
  const RunHistory h = start_history(pop, b);
  const std::vector<double> lo{0.0}, hi{1.0};
  const StateVector s = extract_state(pop, h, lo, hi);
  EXPECT_EQ(s[6], 1.0);
  EXPECT_EQ(s[5], 1.0);  // feasible within accuracy, but exact violation 5e-4 > 0

  const Population exact = population_of({{0.1}, {0.2}}, {Evaluation{1, {-1}, {0}}, Evaluation{2, {0}, {0}}});
  const StateVector z = extract_state(exact, start_history(exact, b), lo, hi);
  EXPECT_EQ(z[6], 1.0);
  EXPECT_EQ(z[5], 0.0);
}

TEST(State, DegenerateObjectiveAndPbestGuards) {
  const Population flat = population_of({{0.5}, {0.5}}, {Evaluation{0, {1}, {}}, Evaluation{0, {1}, {}}});
  BudgetCounter b(10);
  const RunHistory h = start_history(flat, b);
  const std::vector<double> lo{0.0}, hi{1.0};
  const StateVector s = extract_state(flat, h, lo, hi);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_EQ(s[3], 0.0);
  EXPECT_EQ(s[4], 1.0);  // |f_pbest_0| below 1e-12

  RunHistory h2 = h;
  h2.f_pbest_0 = 1e-6;
  const Population big = population_of({{0.5}, {0.5}}, {Evaluation{5, {1}, {}}, Evaluation{6, {1}, {}}});
  EXPECT_EQ(extract_state(big, h2, lo, hi)[4], 10.0);
  h2.f_pbest_0 = -1e-6;
  EXPECT_EQ(extract_state(big, h2, lo, hi)[4], -10.0);
}

TEST(State, EmptyPopulationIsContractError) {
  Population empty;
  RunHistory h;
  const std::vector<double> lo{0.0}, hi{1.0};
  EXPECT_THROW(extract_state(empty, h, lo, hi), ContractError);
}

TEST(State, FiniteUnderFuzz) {
  Rng rng(31);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.index(30), d = 1 + rng.index(6);
    Population pop = random_population(rng, n, d, -5, 5);
    if (t % 3 == 0) {
      for (auto& m : pop.members) m = pop.members.front();
    }
    if (t % 5 == 0) {
      for (auto& m : pop.members) m.eval.g[0] = 1.0 + std::abs(m.eval.g[0]), m.nu = violation(m.eval);
    }
    BudgetCounter b(1000);
    RunHistory h = start_history(pop, b, rng.uniform());
    Population next = random_population(rng, n, d, -5, 5);
    advance_history(h, next, b, rng.uniform());
    const std::vector<double> lo(d, -5.0), hi(d, 5.0);
    const StateVector s = extract_state(next, h, lo, hi);
    for (double v : s) EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(s[6], 0.0);
    EXPECT_LE(s[6], 1.0);
    EXPECT_GE(s[7], 0.0);
    EXPECT_LE(s[7], 1.0);
    EXPECT_GE(s[8], 0.0);
    EXPECT_LE(s[8], 1.0);
    EXPECT_GE(s[9], 0.0);
    EXPECT_LE(s[9], 1.0);
  }
}

TEST(State, CoordinateFeaturesIgnoreAffineRescale) {
  Rng rng(41);
  const std::size_t d = 4;
  Population pop = random_population(rng, 12, d, -5, 5);
  BudgetCounter b(100);
  const RunHistory h = start_history(pop, b);
  const std::vector<double> lo(d, -5.0), hi(d, 5.0);
  const StateVector s = extract_state(pop, h, lo, hi);
  const double scale = 3.5, shift = 11.0;
  Population moved = pop;
  for (auto& m : moved.members) {
    for (double& v : m.x) v = v * scale + shift;
  }
  const std::vector<double> lo2(d, -5.0 * scale + shift), hi2(d, 5.0 * scale + shift);
  const StateVector s2 = extract_state(moved, h, lo2, hi2);
  EXPECT_NEAR(s[0], s2[0], 1e-12);
  EXPECT_NEAR(s[2], s2[2], 1e-12);
}

TEST(Mask, Examples) {
  StateVector s{0.1, 0.2, 0.3, 0.4, 0.5, 0.4, 1.0, 0.6, 0.3, 0.8};
  const StateVector m = mask_constraint_features(s);
  EXPECT_EQ(m[5], 0.0);
  EXPECT_EQ(m[6], 0.0);
  EXPECT_EQ(m[8], 0.0);
  EXPECT_EQ(m[9], 0.0);
  for (std::size_t i : {0u, 1u, 2u, 3u, 4u, 7u}) EXPECT_EQ(m[i], s[i]);
  EXPECT_EQ(mask_constraint_features(m), m);
  const StateVector zero{};
  EXPECT_EQ(mask_constraint_features(zero), zero);
}
