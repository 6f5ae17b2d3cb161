#include <gtest/gtest.h>

#include "helpers.hpp"
#include "sem/accounting.hpp"
#include "sem/oracle.hpp"
#include "sem/search.hpp"

using namespace sem;
using semtest::make_entity;
using semtest::make_topology;

namespace {

// Independent bisection enumerator over the entity graph.
Units reference_bisection(const ServiceEntity& e) {
  const std::size_t n = e.size();
  Units best = -1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto ones = static_cast<std::size_t>(__builtin_popcount(mask));
    if (ones != n / 2) continue;
    Units cut = 0;
    for (const auto& ll : e.lls)
      if (((mask >> ll.u) & 1u) != ((mask >> ll.v) & 1u)) cut += ll.bw_demand;
    if (best < 0 || cut < best) best = cut;
  }
  return best;
}

}  // namespace

TEST(BruteForceP2a, Examples) {
  const CpnTopology g = make_topology({20, 5}, {{0, 1, 10}});
  const ServiceEntity fits = make_entity({4, 6, 2}, {{0, 1, 3}, {1, 2, 3}});
  const OracleReport r = brute_force_p2a(g, fits, 3);
  ASSERT_TRUE(r.optimum_cost.has_value());
  EXPECT_EQ(*r.optimum_cost, 12);
  ASSERT_TRUE(r.optimal_decision.has_value());
  EXPECT_TRUE(r.optimal_decision->flows.empty());
  EXPECT_TRUE(validate_decision(g, fits, *r.optimal_decision).ok());

  const ServiceEntity too_much = make_entity({20, 6}, {{0, 1, 1}});
  EXPECT_FALSE(brute_force_p2a(g, too_much, 3).optimum_cost.has_value());

  const CpnTopology five = make_topology({9, 9, 9, 9, 9}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  EXPECT_THROW(brute_force_p2a(five, fits, 3), ContractError);
}

TEST(BruteForceP2a, CompareRecordsGap) {
  OracleReport r;
  r.optimum_cost = 10;
  r.compare("h", 12);
  r.compare("reject", std::nullopt);
  ASSERT_EQ(r.comparison.size(), 2u);
  EXPECT_DOUBLE_EQ(*r.comparison[0].gap, 0.2);
  EXPECT_FALSE(r.comparison[1].feasible);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("optimum_cost"), 10);
}

TEST(Gadget, OptimumIsTwiceMinBisection) {
  const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}};
  const std::vector<Units> w{1, 2, 1, 3, 1};
  const Gadget gd = make_bisection_gadget(4, edges, w);
  EXPECT_EQ(gd.topology.node_count(), 3u);
  EXPECT_EQ(gd.topology.node(2).cpu_available, 0);
  EXPECT_EQ(gd.topology.node(0).cpu_available + gd.topology.node(1).cpu_available, 4);
  const Units k = reference_bisection(gd.entity);
  EXPECT_EQ(min_bisection_cut(gd.entity), k);
  const OracleReport r = brute_force_p2a(gd.topology, gd.entity, 8);
  ASSERT_TRUE(r.optimum_cost.has_value());
  EXPECT_EQ(*r.optimum_cost - gd.entity.total_cpu_demand(), 2 * k);
}

TEST(Gadget, RandomInstances) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Gadget gd = random_bisection_gadget(seed);
    const Units k = reference_bisection(gd.entity);
    const OracleReport r = brute_force_p2a(gd.topology, gd.entity, 8, {6, 4});
    ASSERT_TRUE(r.optimum_cost.has_value());
    EXPECT_EQ(*r.optimum_cost - gd.entity.total_cpu_demand(), 2 * k) << "seed " << seed;
  }
}

TEST(BruteForcePwkgpp, Examples) {
  const ServiceEntity path4 = make_entity({3, 3, 3, 3}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  const std::vector<Units> caps{100, 100};
  const OracleReport r = brute_force_pwkgpp(path4, ProportionWeights({0.5, 0.5}), {0.0}, caps);
  EXPECT_EQ(r.optimum_cost, 1);
  ASSERT_FALSE(r.comparison.empty());
  EXPECT_GE(r.comparison[0].gap.value_or(0.0), 0.0);

  EXPECT_EQ(brute_force_pwkgpp(path4, ProportionWeights({1.0, 0.0}), {0.0}, caps).optimum_cost, 0);
  const std::vector<Units> small{5, 5};
  EXPECT_FALSE(brute_force_pwkgpp(path4, ProportionWeights({0.5, 0.5}), {0.0}, small).optimum_cost.has_value());
}

TEST(Theorem2, PassesOnTinyAndSingleNodeInstances) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const TinyInstance t = random_tiny_instance(seed);
    const CheckReport c = verify_theorem2(t.entity, t.topology);
    EXPECT_TRUE(c.pass) << "seed " << seed << ": " << c.detail;
  }
  const CpnTopology one = make_topology({50}, {});
  const ServiceEntity e = make_entity({4, 5, 6}, {{0, 1, 1}, {1, 2, 2}});
  const CheckReport c = verify_theorem2(e, one);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.lhs, 0);
}

TEST(Theorem2, BrokenBalanceCheckIsCaught) {
  // Mutation: the upper bound is dropped and the lower bound is inflated.
  const BalancePredicate broken = [](const ServiceEntity& e, const Assignment& x, const ProportionWeights& pwv,
                                     BalanceTolerance) {
    return check_balance(e, x, pwv, {0.0}) && pwv.support().size() == 1;
  };
  std::size_t caught = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const TinyInstance t = random_tiny_instance(seed);
    if (!verify_theorem2(t.entity, t.topology, broken).pass) ++caught;
  }
  EXPECT_GT(caught, 0u);

  const BalancePredicate never = [](const ServiceEntity&, const Assignment&, const ProportionWeights&,
                                    BalanceTolerance) { return false; };
  const TinyInstance t = random_tiny_instance(1);
  EXPECT_FALSE(verify_theorem2(t.entity, t.topology, never).pass);
}

TEST(Proposition1, NestedEqualsFlat) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TinyInstance t = random_tiny_instance(seed);
    const CheckReport c = verify_proposition1(t.entity, t.topology);
    EXPECT_TRUE(c.pass) << "seed " << seed << ": " << c.detail;
    EXPECT_EQ(c.lhs, c.rhs);
  }
}

TEST(Proposition1, ZeroCutInstance) {
  const CpnTopology g = make_topology({30, 30}, {{0, 1, 5}});
  const ServiceEntity e = make_entity({2, 2, 2}, {{0, 1, 9}, {1, 2, 9}});
  const CheckReport c = verify_proposition1(e, g);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.rhs, 6);
}

TEST(OracleSweep, ReportShape) {
  const auto j = oracle_sweep(5, 3);
  EXPECT_TRUE(j.at("all_passed").get<bool>());
  EXPECT_EQ(j.at("instances"), 5);
  for (const char* k : {"proposition1", "theorem2", "gadget", "pwkgpp"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(oracle_sweep(5, 3), j);
}
