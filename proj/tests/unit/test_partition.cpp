#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "sem/accounting.hpp"
#include "sem/generate.hpp"
#include "sem/partition.hpp"

using namespace sem;
using semtest::brute_min_cut;
using semtest::make_entity;

namespace {

// a(3) - b(3) - c(3) - d(3), unit bandwidth
ServiceEntity path4() { return make_entity({3, 3, 3, 3}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}); }

// a=2, b=3, c=2, d=3; a-b 2, c-b 1, c-d 2, b-d 1
ServiceEntity fig2() { return make_entity({2, 3, 2, 3}, {{0, 1, 2}, {2, 1, 1}, {2, 3, 2}, {1, 3, 1}}); }

bool capacity_ok(const ServiceEntity& e, const Assignment& x, const std::vector<Units>& caps) {
  std::vector<Units> load(caps.size(), 0);
  for (std::size_t i = 0; i < e.size(); ++i) load[static_cast<std::size_t>(x.placement[i])] += e.sfs[i].cpu_demand;
  for (std::size_t m = 0; m < caps.size(); ++m)
    if (load[m] > caps[m]) return false;
  return true;
}

}  // namespace

TEST(ProportionWeights, Validation) {
  EXPECT_NO_THROW(ProportionWeights({0.6, 0.4}).validate());
  EXPECT_THROW(ProportionWeights({0.6, 0.5}).validate(), ModelError);
  EXPECT_THROW(ProportionWeights({1.2, -0.2}).validate(), ModelError);
  EXPECT_EQ(ProportionWeights({0.0, 1.0, 0.0}).support(), std::vector<NodeId>{1});
}

TEST(PartitionHeuristic, PathOfFourHalfHalf) {
  const ServiceEntity e = path4();
  const std::vector<Units> caps{100, 100};
  const ProportionWeights pwv({0.5, 0.5});
  ASSERT_EQ(brute_min_cut(e, pwv.weights, 0.0, caps), 1);
  const auto r = partition_heuristic(e, pwv, {0.0}, caps, 1);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->cut, 1);
  EXPECT_EQ(r->assignment[0], r->assignment[1]);
  EXPECT_EQ(r->assignment[2], r->assignment[3]);
  EXPECT_NE(r->assignment[1], r->assignment[2]);
  EXPECT_DOUBLE_EQ(r->theta_used, 0.0);
}

TEST(PartitionHeuristic, SingleSupport) {
  const ServiceEntity e = path4();
  const std::vector<Units> caps{100, 100, 100};
  const auto r = partition_heuristic(e, ProportionWeights({0.0, 1.0, 0.0}), {0.05}, caps, 3);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->cut, 0);
  EXPECT_EQ(r->assignment, Assignment({1, 1, 1, 1}));
}

TEST(PartitionHeuristic, EightTwoGroupingPicksCheaperCut) {
  const ServiceEntity e = fig2();
  // Reference: the two balanced groupings.
  EXPECT_EQ(cut_bandwidth(e, Assignment({0, 0, 1, 0})), 3);
  EXPECT_EQ(cut_bandwidth(e, Assignment({1, 0, 0, 0})), 2);
  const std::vector<Units> caps{100, 100};
  const ProportionWeights pwv({0.8, 0.2});
  ASSERT_EQ(brute_min_cut(e, pwv.weights, 0.0, caps), 2);
  const auto r = partition_heuristic(e, pwv, {0.0}, caps, 7);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->cut, 2);
  EXPECT_EQ(r->assignment, Assignment({1, 0, 0, 0}));
}

TEST(PartitionHeuristic, RelaxesThetaForIntegralDemands) {
  // Demands 3 and 2 cannot hit 0.5 / 0.5 exactly.
  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 1}});
  const std::vector<Units> caps{10, 10};
  const auto r = partition_heuristic(e, ProportionWeights({0.5, 0.5}), {0.0}, caps, 1);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(r->theta_used, 0.2, 1e-9);
  EXPECT_TRUE(check_balance(e, r->assignment, ProportionWeights({0.5, 0.5}), {r->theta_used}));

  PartitionOptions strict;
  strict.relax_limit = 0.0;
  EXPECT_FALSE(partition_heuristic(e, ProportionWeights({0.5, 0.5}), {0.0}, caps, 1, strict).has_value());
}

TEST(PartitionHeuristic, CapacityInfeasible) {
  const ServiceEntity e = path4();
  const std::vector<Units> caps{5, 5};
  EXPECT_FALSE(partition_heuristic(e, ProportionWeights({0.5, 0.5}), {0.05}, caps, 1).has_value());
  EXPECT_FALSE(partition_exact(e, ProportionWeights({0.5, 0.5}), {0.05}, caps).has_value());
}

TEST(PartitionHeuristic, DeterministicUnderSeed) {
  EntityParams p;
  p.size = {40, 40};
  p.density = 0.3;
  const ServiceEntity e = generate_service_entity(p, 17);
  const std::vector<Units> caps{1000, 1000, 1000, 1000};
  const ProportionWeights pwv({0.4, 0.3, 0.2, 0.1});
  const auto a = partition_heuristic(e, pwv, {0.05}, caps, 99);
  const auto b = partition_heuristic(e, pwv, {0.05}, caps, 99);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->assignment, b->assignment);
  EXPECT_TRUE(check_balance(e, a->assignment, pwv, {a->theta_used}));
}

TEST(PartitionExact, MatchesEnumerationAndDominatesHeuristic) {
  std::mt19937_64 rng(31);
  int compared = 0;
  for (int i = 0; i < 60; ++i) {
    EntityParams p;
    p.size = {3, 8};
    p.density = 0.4;
    p.demand = {1, 6};
    const ServiceEntity e = generate_service_entity(p, rng());
    const std::size_t k = 2 + rng() % 2;
    std::vector<double> w(k);
    double s = 0;
    for (auto& x : w) s += (x = 1.0 + static_cast<double>(rng() % 5));
    for (auto& x : w) x /= s;
    const std::vector<Units> caps(k, 200);
    const ProportionWeights pwv(w);
    const auto exact = partition_exact(e, pwv, {0.2}, caps);
    const auto ref = brute_min_cut(e, w, 0.2, caps);
    ASSERT_EQ(exact.has_value(), ref.has_value());
    if (!exact) continue;
    EXPECT_EQ(exact->cut, *ref);
    EXPECT_TRUE(check_balance(e, exact->assignment, pwv, {0.2}));
    PartitionOptions no_relax;
    no_relax.relax_limit = 0.0;
    if (const auto h = partition_heuristic(e, pwv, {0.2}, caps, 5, no_relax)) {
      EXPECT_LE(exact->cut, h->cut);
      ++compared;
    }
  }
  EXPECT_GT(compared, 20);
}

TEST(PartitionExact, PathOfFourAndBound) {
  const std::vector<Units> caps{100, 100};
  const auto r = partition_exact(path4(), ProportionWeights({0.5, 0.5}), {0.0}, caps);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->cut, 1);
  EXPECT_EQ(r->assignment, Assignment({0, 0, 1, 1}));

  EntityParams p;
  p.size = {13, 13};
  const ServiceEntity big = generate_service_entity(p, 1);
  EXPECT_THROW(partition_exact(big, ProportionWeights({0.5, 0.5}), {0.0}, caps), ContractError);
}

TEST(PwvFromAssignment, Examples) {
  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 1}});
  EXPECT_EQ(pwv_from_assignment(e, Assignment({0, 0}), 2).weights, (std::vector<double>{1.0, 0.0}));
  const ProportionWeights split = pwv_from_assignment(e, Assignment({0, 1}), 2);
  EXPECT_DOUBLE_EQ(split[0], 0.6);
  EXPECT_DOUBLE_EQ(split[1], 0.4);
}

TEST(PwvFromAssignment, RoundTripAdmitsOriginalAtZeroTolerance) {
  std::mt19937_64 rng(4);
  EntityParams p;
  p.size = {3, 9};
  for (int i = 0; i < 50; ++i) {
    const ServiceEntity e = generate_service_entity(p, rng());
    Assignment x = Assignment::unplaced(e.size());
    for (auto& m : x.placement) m = static_cast<NodeId>(rng() % 4);
    const ProportionWeights pwv = pwv_from_assignment(e, x, 4);
    EXPECT_NO_THROW(pwv.validate());
    EXPECT_TRUE(check_balance(e, x, pwv, {0.0}));
  }
}

TEST(CheckBalance, Examples) {
  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 1}});
  EXPECT_TRUE(check_balance(e, Assignment({0, 1}), ProportionWeights({0.6, 0.4}), {0.0}));

  // 11 of 20 units on node 0 = 0.55 against rho 0.5: upper bound 0.525.
  const ServiceEntity f = make_entity({11, 9}, {{0, 1, 1}});
  EXPECT_FALSE(check_balance(f, Assignment({0, 1}), ProportionWeights({0.5, 0.5}), {0.05}));
  EXPECT_TRUE(check_balance(f, Assignment({0, 1}), ProportionWeights({0.5, 0.5}), {0.1}));

  EXPECT_FALSE(check_balance(e, Assignment({0, 2}), ProportionWeights({0.6, 0.4, 0.0}), {0.5}));
}

TEST(PartitionHeuristic, SuccessesSatisfyBalanceAndCapacity) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    EntityParams p;
    p.size = {4, 30};
    p.density = 0.3;
    const ServiceEntity e = generate_service_entity(p, rng());
    const std::size_t k = 1 + rng() % 5;
    std::vector<double> w(k);
    double s = 0;
    for (auto& x : w) s += (x = 1.0 + static_cast<double>(rng() % 9));
    for (auto& x : w) x /= s;
    std::vector<Units> caps(k);
    for (std::size_t m = 0; m < k; ++m)
      caps[m] = static_cast<Units>(w[m] * static_cast<double>(e.total_cpu_demand()) * 1.3) + 1;
    const ProportionWeights pwv(w);
    if (const auto r = partition_heuristic(e, pwv, {0.05}, caps, rng())) {
      EXPECT_TRUE(check_balance(e, r->assignment, pwv, {r->theta_used}));
      EXPECT_LE(r->theta_used, 0.25 + 1e-12);
      EXPECT_TRUE(capacity_ok(e, r->assignment, caps));
      EXPECT_EQ(r->cut, cut_bandwidth(e, r->assignment));
    }
  }
}
