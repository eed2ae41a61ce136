#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rleceo/problems.hpp"

using namespace rleceo;

namespace {

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

}  // namespace

TEST(Cec12, AtShiftOrigin) {
  for (std::size_t d : {1u, 4u, 10u}) {
    const Evaluation e = cec12(zeros(d), ShiftSpec(zeros(d)));
    EXPECT_DOUBLE_EQ(e.f, 0.0);
    EXPECT_DOUBLE_EQ(e.g[0], 4.0);
    EXPECT_DOUBLE_EQ(e.h[0], -4.0);
    EXPECT_DOUBLE_EQ(violation(e), 8.0);
    EXPECT_DOUBLE_EQ(sco(e), 8.0);
  }
}

TEST(Cec12, UnitCorner) {
  const Evaluation e = cec12(std::vector<double>{1, 1, 1, 1}, ShiftSpec(zeros(4)));
  EXPECT_NEAR(e.f, 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.g[0], 0.0);
  EXPECT_DOUBLE_EQ(e.h[0], 0.0);
  EXPECT_TRUE(is_feasible(e));
  EXPECT_NEAR(sco(e), 4.0, 1e-12);
}

TEST(Cec12, OneDimensional) {
  const Evaluation e = cec12(std::vector<double>{2.0}, ShiftSpec(zeros(1)));
  EXPECT_NEAR(e.f, 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.g[0], 2.0);
  EXPECT_DOUBLE_EQ(e.h[0], 0.0);
}

TEST(Cec12, SphereIdentity) {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const std::size_t d = 4 + rng.index(8);
    std::vector<double> y(d);
    for (double& v : y) v = rng.normal(0, 1);
    const double r = std::sqrt(detail::sum_squares(y));
    for (double& v : y) v *= 2.0 / r;
    const Evaluation e = cec12(y, ShiftSpec(zeros(d)));
    double abs_sum = 0.0;
    for (double v : y) abs_sum += std::abs(v);
    if (abs_sum >= 4.0) {
      EXPECT_NEAR(violation(e), 0.0, 1e-12);
    }
  }
}

TEST(Cec14, Examples) {
  const Evaluation e0 = cec14(zeros(3), ShiftSpec(zeros(3)));
  EXPECT_DOUBLE_EQ(e0.f, 0.0);
  EXPECT_DOUBLE_EQ(e0.g[0], -300.0);
  EXPECT_DOUBLE_EQ(e0.h[0], 1.0);
  EXPECT_FALSE(is_feasible(e0));

  const Evaluation e1 = cec14(std::vector<double>{0.75 * std::numbers::pi, 0.1}, ShiftSpec(zeros(2)));
  EXPECT_NEAR(e1.h[0], 0.0, 1e-15);
  EXPECT_TRUE(is_feasible(e1));

  // The free function is not bound-checked, so y = (200, 0) can be probed directly.
  const Evaluation e2 = cec14(std::vector<double>{200.0, 0.0}, ShiftSpec(zeros(2)));
  EXPECT_DOUBLE_EQ(e2.g[0], 39800.0);
  EXPECT_GT(violation(e2), 0.0);
}

TEST(Cec14, EqualityDependsOnlyOnMaxAbs) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const double m = rng.uniform(0, 10);
    std::vector<double> a{m, rng.uniform(-m, m), rng.uniform(-m, m)};
    std::vector<double> b{rng.uniform(-m, m), -m, rng.uniform(-m, m)};
    EXPECT_EQ(cec14(a, ShiftSpec(zeros(3))).h[0], cec14(b, ShiftSpec(zeros(3))).h[0]);
  }
}

TEST(Shift, Equivariance) {
  Rng rng(8);
  const std::vector<double> o{3.0, -7.5, 12.0, 0.25};
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z(4), x(4);
    for (std::size_t i = 0; i < 4; ++i) {
      z[i] = rng.uniform(-20, 20);
      x[i] = z[i] + o[i];
    }
    const Evaluation a = cec12(x, ShiftSpec(o)), b = cec12(z, ShiftSpec(zeros(4)));
    EXPECT_NEAR(a.f, b.f, 1e-9);
    EXPECT_NEAR(a.g[0], b.g[0], 1e-9);
    EXPECT_NEAR(a.h[0], b.h[0], 1e-9);
    const Evaluation c = cec14(x, ShiftSpec(o)), d = cec14(z, ShiftSpec(zeros(4)));
    EXPECT_NEAR(c.f, d.f, 1e-9);
  }
}

TEST(Shift, MustBeInterior) {
  EXPECT_THROW(ShiftSpec(std::vector<double>{100.0}), ContractError);
  EXPECT_NO_THROW(ShiftSpec(std::vector<double>{99.0}));
}

TEST(Synthetic, SphereLinearCertifiedPoint) {
  const ConstrainedProblem p = synthetic_family(0, 10, "sphere-linear");
  EXPECT_EQ(p.num_inequality(), 1u);
  EXPECT_EQ(p.num_equality(), 0u);
  ASSERT_TRUE(p.certified_feasible_point().has_value());
  EXPECT_EQ(violation(p.evaluate(*p.certified_feasible_point())), 0.0);
}

TEST(Synthetic, EveryKindIsDeterministicAndFeasibleAtItsCertifiedPoint) {
  for (const auto& kind : synthetic_kinds()) {
    for (std::uint64_t seed : {0u, 1u, 7u}) {
      for (std::size_t d : {2u, 10u, 30u}) {
        const ConstrainedProblem a = synthetic_family(seed, d, kind);
        const ConstrainedProblem b = synthetic_family(seed, d, kind);
        ASSERT_TRUE(a.certified_feasible_point().has_value()) << kind;
        const auto& x = *a.certified_feasible_point();
        const Evaluation ea = a.evaluate(x);
        EXPECT_EQ(violation(ea), 0.0) << kind << " seed " << seed << " D=" << d;
        EXPECT_TRUE(is_feasible(ea)) << kind;
        EXPECT_GE(a.num_inequality(), 1u);
        EXPECT_LE(a.num_inequality(), 2u);
        EXPECT_LE(a.num_equality(), 1u);
        Rng rng(seed + d);
        std::vector<double> probe(d);
        for (std::size_t i = 0; i < d; ++i) probe[i] = rng.uniform(-100, 100);
        const Evaluation pa = a.evaluate(probe), pb = b.evaluate(probe);
        EXPECT_EQ(pa.f, pb.f);
        EXPECT_EQ(pa.g, pb.g);
        EXPECT_EQ(pa.h, pb.h);
      }
    }
  }
}

TEST(Synthetic, UnknownKindIsContractError) {
  EXPECT_THROW(synthetic_family(0, 10, "nope"), ContractError);
}

TEST(Registry, Lookup) {
  const ConstrainedProblem p = registry_lookup("cec12", 10);
  EXPECT_EQ(p.dim(), 10u);
  EXPECT_EQ(p.num_constraints(), 2u);
  EXPECT_THROW(registry_lookup("cec12", 7), LookupError);
  const ConstrainedProblem s1 = registry_lookup("synthetic/sphere-linear/0", 50);
  const ConstrainedProblem s2 = registry_lookup("synthetic/sphere-linear/0", 50);
  const auto& x = *s1.certified_feasible_point();
  EXPECT_EQ(s1.evaluate(x).f, s2.evaluate(x).f);
}

TEST(Registry, UnknownNameListsValidNames) {
  try {
    registry_lookup("cec99", 10);
    FAIL() << "expected a lookup error";
  } catch (const LookupError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cec12"), std::string::npos);
    EXPECT_NE(msg.find("cec14"), std::string::npos);
    EXPECT_NE(msg.find("synthetic/"), std::string::npos);
  }
  EXPECT_THROW(registry_lookup("synthetic/nope/1", 10), LookupError);
  EXPECT_THROW(registry_lookup("synthetic/sphere-linear/x", 10), LookupError);
}

TEST(Registry, CertifiedPointsAreFeasible) {
  for (const std::string name : {"cec12", "cec14", "sphere", "synthetic/rastrigin-ring/3"}) {
    const ConstrainedProblem p = registry_lookup(name, 10);
    ASSERT_TRUE(p.certified_feasible_point().has_value()) << name;
    EXPECT_TRUE(is_feasible(p.evaluate(*p.certified_feasible_point()))) << name;
  }
}

TEST(Registry, ShiftFileOverridesDefault) {
  std::istringstream in("cec12 4\n1 2 3 4\n\nsynthetic/sphere-linear/0 2\n0.5 -0.5\n");
  const ShiftTable table = parse_shift_table(in);
  const ConstrainedProblem p = registry_lookup("cec12", 10, &table);  // no entry for D=10
  EXPECT_EQ(p.dim(), 10u);
  ProblemRegistry r;
  r.add("cec12", [](std::size_t d, ShiftSpec s) { return make_cec12(d, std::move(s)); });
  const ConstrainedProblem q = r.lookup("cec12", 4, &table);
  const Evaluation e = q.evaluate(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(e.f, 0.0);
  EXPECT_DOUBLE_EQ(e.g[0], 4.0);
  const ConstrainedProblem s = registry_lookup("synthetic/sphere-linear/0", 2, &table);
  EXPECT_EQ(s.dim(), 2u);
}

TEST(Registry, MalformedShiftFile) {
  std::istringstream missing("cec12 3\n1 2\n");
  EXPECT_THROW(parse_shift_table(missing), ConfigError);
  std::istringstream bad("cec12 2\n1 x\n");
  EXPECT_THROW(parse_shift_table(bad), ConfigError);
}
