#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "sem/accounting.hpp"
#include "sem/generate.hpp"
#include "sem/io.hpp"
#include "sem/routing.hpp"

using namespace sem;
using semtest::make_entity;
using semtest::make_topology;

namespace {

bool connected(const CpnTopology& g) {
  std::vector<bool> seen(g.node_count(), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (const auto& nb : g.neighbors(u))
      if (!seen[static_cast<std::size_t>(nb.node)]) {
        seen[static_cast<std::size_t>(nb.node)] = true;
        ++count;
        stack.push_back(nb.node);
      }
  }
  return count == g.node_count();
}

MappingDecision colocated(const ServiceEntity& e, NodeId m) {
  return {e.id, Assignment(std::vector<NodeId>(e.size(), m)), {}};
}

}  // namespace

TEST(Topology, RejectsStructuralViolations) {
  EXPECT_THROW(make_topology({10, 10}, {{0, 0, 5}}), ModelError);
  EXPECT_THROW(make_topology({10, 10}, {{0, 1, 5}, {1, 0, 5}}), ModelError);
  EXPECT_THROW(make_topology({10, 10, 10}, {{0, 1, 5}}), ModelError);
  EXPECT_THROW(make_topology({0, 10}, {{0, 1, 5}}), ModelError);
  EXPECT_NO_THROW(make_topology({10}, {}));
}

TEST(GenerateRandomCpn, LargeScale) {
  const CpnTopology g = generate_random_cpn(100, 500, {400, 600}, {400, 600}, 11);
  EXPECT_EQ(g.node_count(), 100u);
  EXPECT_EQ(g.link_count(), 500u);
  EXPECT_TRUE(connected(g));
  for (const auto& n : g.nodes()) {
    EXPECT_GE(n.cpu_capacity, 400);
    EXPECT_LE(n.cpu_capacity, 600);
    EXPECT_EQ(n.cpu_available, n.cpu_capacity);
  }
  for (const auto& l : g.links()) {
    EXPECT_GE(l.bw_capacity, 400);
    EXPECT_LE(l.bw_capacity, 600);
  }
}

TEST(GenerateRandomCpn, MinimalAndComplete) {
  const CpnTopology two = generate_random_cpn(2, 1, {10, 10}, {5, 5}, 3);
  ASSERT_EQ(two.link_count(), 1u);
  EXPECT_EQ(two.node(0).cpu_capacity, 10);
  EXPECT_EQ(two.node(1).cpu_capacity, 10);
  EXPECT_EQ(two.link(0).bw_capacity, 5);

  const CpnTopology k5 = generate_random_cpn(5, 10, {100, 100}, {50, 50}, 3);
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) EXPECT_TRUE(k5.find_link(a, b).has_value());
}

TEST(GenerateRandomCpn, ParameterErrorsAndDeterminism) {
  EXPECT_THROW(generate_random_cpn(4, 7, {1, 2}, {1, 2}, 1), ModelError);
  EXPECT_THROW(generate_random_cpn(4, 2, {1, 2}, {1, 2}, 1), ModelError);
  EXPECT_TRUE(generate_random_cpn(30, 60, {100, 150}, {100, 150}, 9) ==
              generate_random_cpn(30, 60, {100, 150}, {100, 150}, 9));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CpnTopology g = generate_random_cpn(12, 14, {1, 5}, {1, 5}, seed);
    EXPECT_EQ(g.link_count(), 14u);
    EXPECT_TRUE(connected(g));
  }
}

TEST(LoadCpnEdgeList, SmallestValidFile) {
  const CpnTopology g = load_cpn_edge_list("NODES 2\n0 10\n1 10\nLINKS 1\n0 1 5\n");
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.link_count(), 1u);
  EXPECT_EQ(g.link(0).bw_available, 5);
  EXPECT_EQ(write_cpn_edge_list(g), "NODES 2\n0 10\n1 10\nLINKS 1\n0 1 5\n");
}

TEST(LoadCpnEdgeList, ErrorsCarryLineNumbers) {
  try {
    load_cpn_edge_list("NODES 2\n0 10\n1 10\nLINKS 1\n0 0 5\n");
    FAIL() << "self-loop accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  try {
    load_cpn_edge_list("NODES 2\n0 10\n1 10\nLINKS 2\n0 1 5\n1 0 5\n");
    FAIL() << "duplicate accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
  try {
    load_cpn_edge_list("NODES 3\n0 10\n1 10\n2 10\nLINKS 1\n0 1 5\n");
    FAIL() << "disconnected accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(load_cpn_edge_list("NODES 2\n0 ten\n1 10\nLINKS 1\n0 1 5\n"), ParseError);
}

TEST(ImportEdgeList, RelabelsAndCollapsesDuplicates) {
  const std::string text = "# comment\n100 200 3\n200 300\n300 100 1\n200 100 7\n";
  const CpnTopology g = import_edge_list(text, {400, 600}, {400, 600}, 5);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.link_count(), 3u);
  EXPECT_TRUE(g.find_link(0, 1).has_value());
  EXPECT_TRUE(g.find_link(1, 2).has_value());
  EXPECT_TRUE(g.find_link(0, 2).has_value());
  EXPECT_TRUE(import_edge_list(text, {400, 600}, {400, 600}, 5) == g);
}

TEST(GenerateServiceEntity, LargeWorkloadShape) {
  EntityParams p;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ServiceEntity e = generate_service_entity(p, seed);
    EXPECT_GE(e.size(), 50u);
    EXPECT_LE(e.size(), 100u);
    EXPECT_NO_THROW(validate_entity(e));
    for (const auto& sf : e.sfs) EXPECT_TRUE(sf.cpu_demand >= 1 && sf.cpu_demand <= 20);
    for (const auto& ll : e.lls) EXPECT_TRUE(ll.bw_demand >= 1 && ll.bw_demand <= 20);
    const double pairs = static_cast<double>(e.size() * (e.size() - 1) / 2);
    EXPECT_GT(static_cast<double>(e.lls.size()) / pairs, 0.85);
  }
}

TEST(GenerateServiceEntity, DegenerateDensities) {
  EntityParams p;
  p.size = {2, 2};
  p.density = 0.0;
  const ServiceEntity edge = generate_service_entity(p, 4);
  EXPECT_EQ(edge.size(), 2u);
  EXPECT_EQ(edge.lls.size(), 1u);

  p.size = {4, 4};
  p.density = 1.0;
  const ServiceEntity k4 = generate_service_entity(p, 4);
  EXPECT_EQ(k4.lls.size(), 6u);
  EXPECT_NO_THROW(validate_entity(k4));
}

TEST(ValidateEntity, RejectsMalformed) {
  EXPECT_THROW(validate_entity(make_entity({1, 1, 1}, {{0, 1, 1}})), ModelError);
  EXPECT_THROW(validate_entity(make_entity({1, 0}, {{0, 1, 1}})), ModelError);
  EXPECT_THROW(validate_entity(make_entity({1, 1}, {{0, 1, 0}})), ModelError);
  EXPECT_THROW(validate_entity(make_entity({1, 1}, {{0, 1, 1}, {1, 0, 2}})), ModelError);
  ServiceEntity e = make_entity({1, 1}, {{0, 1, 1}});
  e.lifetime = 0.0;
  EXPECT_THROW(validate_entity(e), ModelError);
}

TEST(CutLinks, Examples) {
  const ServiceEntity path = make_entity({1, 1, 1}, {{0, 1, 1}, {1, 2, 1}});
  EXPECT_TRUE(cut_links(path, Assignment({0, 0, 0})).empty());
  EXPECT_EQ(cut_links(path, Assignment({0, 0, 1})), std::vector<LlIndex>{1});
  EXPECT_THROW(cut_links(path, Assignment({0, kUnplaced, 1})), ContractError);
  EXPECT_THROW(cut_links(path, Assignment({0, 0})), ContractError);
}

TEST(CutLinks, K4TwoTwoSplit) {
  const ServiceEntity k4 = make_entity({1, 1, 1, 1}, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  const Assignment x({0, 0, 1, 1});
  // Reference: an edge crosses iff its endpoints differ in the bipartition.
  std::vector<LlIndex> expected;
  for (std::size_t i = 0; i < k4.lls.size(); ++i)
    if (x[k4.lls[i].u] != x[k4.lls[i].v]) expected.push_back(static_cast<LlIndex>(i));
  ASSERT_EQ(expected.size(), 4u);
  EXPECT_EQ(cut_links(k4, x), expected);
}

TEST(CutLinks, InvariantUnderRelabelling) {
  EntityParams p;
  p.size = {8, 8};
  p.density = 0.5;
  const ServiceEntity e = generate_service_entity(p, 21);
  const Assignment x({0, 1, 2, 0, 1, 2, 0, 1});
  const Assignment relabelled({3, 0, 1, 3, 0, 1, 3, 0});
  EXPECT_EQ(cut_links(e, x), cut_links(e, relabelled));
}

TEST(Revenue, Examples) {
  EXPECT_EQ(revenue(make_entity({3, 2}, {{0, 1, 4}})), 9);
  EXPECT_EQ(revenue(make_entity({7}, {})), 7);
  EXPECT_EQ(revenue(make_entity({1, 1, 1}, {{0, 1, 2}, {1, 2, 2}, {0, 2, 2}})), 9);
}

TEST(Cost, Examples) {
  const CpnTopology g = make_topology({10, 10, 10}, {{0, 1, 10}, {1, 2, 10}});
  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 4}});
  EXPECT_EQ(cost(e, colocated(e, 0)), 5);

  MappingDecision split{0, Assignment({0, 2}), {}};
  split.flows[0] = make_path(g, {0, 1, 2});
  EXPECT_EQ(cost(e, split), 13);

  const CpnTopology tri = make_topology({10, 10, 10}, {{0, 1, 10}, {1, 2, 10}, {0, 2, 10}});
  const ServiceEntity e2 = make_entity({4, 3, 3}, {{0, 1, 1}, {1, 2, 2}});
  MappingDecision d{0, Assignment({0, 1, 2}), {}};
  d.flows[0] = make_path(tri, {0, 1});
  d.flows[1] = make_path(tri, {1, 2});
  EXPECT_EQ(cost(e2, d), 13);
}

TEST(Profit, Examples) {
  const ProfitParams params{2.0, 0.5};
  EXPECT_DOUBLE_EQ(profit_from_totals(10, 10, 100, 60, params), 70.0);
  EXPECT_DOUBLE_EQ(profit_from_totals(5, 10, 100, 60, params), 0.25 * 70.0);
  EXPECT_DOUBLE_EQ(profit_from_totals(0, 0, 0, 0, params), 0.0);

  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 4}});
  const MappingDecision d = colocated(e, 0);
  const std::vector<AcceptedRequest> acc{{&e, &d}};
  // revenue 9, cost 5 -> (1/2)^2 * (9 - 2.5)
  EXPECT_DOUBLE_EQ(profit(acc, 2, params), 0.25 * 6.5);
  EXPECT_THROW(profit(acc, 0, params), ContractError);
}

TEST(ProfitParams, Validation) {
  EXPECT_NO_THROW((ProfitParams{2.0, 0.5}.validate()));
  EXPECT_THROW((ProfitParams{0.5, 0.5}.validate()), ModelError);
  EXPECT_THROW((ProfitParams{2.0, 1.0}.validate()), ModelError);
}

TEST(ValidateDecision, Examples) {
  const CpnTopology g = make_topology({10, 10, 10}, {{0, 1, 10}, {1, 2, 10}});
  const ServiceEntity e = make_entity({6, 6}, {{0, 1, 3}});
  EXPECT_TRUE(validate_decision(make_topology({20}, {}), e, colocated(e, 0)).ok());

  const ValidationReport over = validate_decision(g, e, colocated(e, 0));
  EXPECT_TRUE(over.violates(3));

  MappingDecision wrong_end{0, Assignment({0, 1}), {}};
  wrong_end.flows[0] = make_path(g, {0, 1, 2});
  EXPECT_TRUE(validate_decision(g, e, wrong_end).violates(5));
}

TEST(ValidateDecision, EveryConstraint) {
  const CpnTopology g = make_topology({10, 10, 10}, {{0, 1, 2}, {1, 2, 10}});
  const ServiceEntity e = make_entity({3, 3}, {{0, 1, 3}});

  EXPECT_TRUE(validate_decision(g, e, MappingDecision{0, Assignment({0, kUnplaced}), {}}).violates(1));
  EXPECT_TRUE(validate_decision(g, e, MappingDecision{0, Assignment({0, 7}), {}}).violates(1));
  EXPECT_TRUE(validate_decision(g, e, MappingDecision{5, Assignment({0, 0}), {}}).violates(1));

  EXPECT_TRUE(validate_decision(g, e, MappingDecision{0, Assignment({0, 1}), {}}).violates(4));

  MappingDecision internal{0, Assignment({1, 1}), {}};
  internal.flows[0] = make_path(g, {1, 2});
  EXPECT_TRUE(validate_decision(g, e, internal).violates(5));

  MappingDecision thin{0, Assignment({0, 1}), {}};
  thin.flows[0] = make_path(g, {0, 1});
  const ValidationReport r = validate_decision(g, e, thin);
  EXPECT_TRUE(r.violates(6));
  EXPECT_FALSE(r.violates(3));
  EXPECT_NE(r.summary().find("6"), std::string::npos);
}

TEST(Ledger, AllocateReleaseRoundTrip) {
  const CpnTopology g = make_topology({10, 10, 10}, {{0, 1, 10}, {1, 2, 10}});
  ResourceLedger ledger(g);
  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 4}});
  MappingDecision d{0, Assignment({0, 2}), {}};
  d.flows[0] = make_path(g, {0, 1, 2});
  const double cu_before = cu_ratio(ledger.topology());
  ASSERT_TRUE(ledger.allocate(e, d).ok());
  EXPECT_EQ(ledger.topology().node(0).cpu_available, 7);
  EXPECT_EQ(ledger.topology().link(1).bw_available, 6);
  // Reference: 5 CPU used out of 30.
  EXPECT_DOUBLE_EQ(cu_ratio(ledger.topology()), 5.0 / 30.0);
  EXPECT_TRUE(ledger.conservation_holds());
  ledger.release(e, d);
  EXPECT_TRUE(ledger.topology() == g);
  EXPECT_DOUBLE_EQ(cu_ratio(ledger.topology()), cu_before);
  EXPECT_THROW(ledger.release(e, d), ContractError);
  EXPECT_THROW(ledger.release(42), ContractError);
}

TEST(Ledger, RefusedAllocationLeavesTopologyUntouched) {
  const CpnTopology g = make_topology({5, 10}, {{0, 1, 10}});
  ResourceLedger ledger(g);
  const ServiceEntity e = make_entity({3, 3}, {{0, 1, 4}});
  EXPECT_FALSE(ledger.allocate(e, colocated(e, 0)).ok());
  EXPECT_TRUE(ledger.topology() == g);
  EXPECT_FALSE(ledger.resident(0));
}

TEST(Ledger, SharedLinkDebitedTwice) {
  const CpnTopology g = make_topology({10, 10, 10}, {{0, 1, 20}, {1, 2, 20}});
  ResourceLedger ledger(g);
  const ServiceEntity a = make_entity({1, 1}, {{0, 1, 4}}, 1);
  const ServiceEntity b = make_entity({1, 1}, {{0, 1, 5}}, 2);
  MappingDecision da{1, Assignment({0, 2}), {}};
  da.flows[0] = make_path(g, {0, 1, 2});
  MappingDecision db{2, Assignment({1, 2}), {}};
  db.flows[0] = make_path(g, {1, 2});
  ASSERT_TRUE(ledger.allocate(a, da).ok());
  ASSERT_TRUE(ledger.allocate(b, db).ok());
  // Reference: link 1-2 carries 4 + 5, link 0-1 only 4.
  EXPECT_EQ(ledger.topology().link(*g.find_link(1, 2)).bw_available, 20 - 9);
  EXPECT_EQ(ledger.topology().link(*g.find_link(0, 1)).bw_available, 20 - 4);
  EXPECT_EQ(ledger.debited_bw(), ledger.resident_bw());
  EXPECT_EQ(ledger.resident_bw(), 4 * 2 + 5);
  EXPECT_THROW(ledger.allocate(a, da), ContractError);
}

TEST(Ledger, ConservationUnderRandomChurn) {
  const CpnTopology g = generate_random_cpn(10, 18, {40, 60}, {40, 60}, 2);
  const PathTable table = precompute_k_paths(g, 3);
  ResourceLedger ledger(g);
  EntityParams p;
  p.size = {3, 6};
  p.density = 0.5;
  std::vector<std::pair<ServiceEntity, MappingDecision>> live;
  std::mt19937_64 rng(5);
  for (int step = 0; step < 200; ++step) {
    if (!live.empty() && rng() % 3 == 0) {
      const std::size_t i = rng() % live.size();
      ledger.release(live[i].first, live[i].second);
      live.erase(live.begin() + static_cast<long>(i));
    } else {
      ServiceEntity e = generate_service_entity(p, rng(), step);
      Assignment x = Assignment::unplaced(e.size());
      for (auto& m : x.placement) m = static_cast<NodeId>(rng() % g.node_count());
      auto flows = map_cut_links(ledger.topology(), e, cut_links(e, x), x, table);
      if (!flows) continue;
      MappingDecision d{e.id, x, *flows};
      if (ledger.allocate(e, d).ok()) live.emplace_back(e, d);
    }
    ASSERT_TRUE(ledger.conservation_holds());
    ASSERT_EQ(ledger.debited_cpu(), ledger.resident_cpu());
    ASSERT_EQ(ledger.debited_bw(), ledger.resident_bw());
  }
  for (auto& [e, d] : live) ledger.release(e, d);
  EXPECT_TRUE(ledger.topology() == g);
}

TEST(Cost, AtLeastNodeCostWithEqualityIffColocated) {
  const CpnTopology g = generate_random_cpn(6, 8, {50, 50}, {50, 50}, 4);
  const PathTable table = precompute_k_paths(g, 3);
  EntityParams p;
  p.size = {4, 7};
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const ServiceEntity e = generate_service_entity(p, rng());
    Assignment x = Assignment::unplaced(e.size());
    for (auto& m : x.placement) m = static_cast<NodeId>(rng() % 6);
    auto flows = map_cut_links(g, e, cut_links(e, x), x, table);
    if (!flows) continue;
    const MappingDecision d{e.id, x, *flows};
    EXPECT_GE(cost(e, d), e.total_cpu_demand());
    EXPECT_EQ(cost(e, d) == e.total_cpu_demand(), d.flows.empty());
  }
}

TEST(WorkloadIo, RoundTrip) {
  EntityParams p;
  p.size = {3, 6};
  std::vector<ServiceEntity> w;
  for (int i = 0; i < 4; ++i) {
    ServiceEntity e = generate_service_entity(p, static_cast<std::uint64_t>(i), i);
    e.arrival_time = 1.5 * i;
    e.lifetime = 10.0 + i;
    w.push_back(e);
  }
  const auto back = load_workload(write_workload(w));
  ASSERT_EQ(back.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(back[i].id, w[i].id);
    EXPECT_EQ(back[i].sfs.size(), w[i].sfs.size());
    EXPECT_EQ(back[i].lls.size(), w[i].lls.size());
    EXPECT_EQ(back[i].total_bw_demand(), w[i].total_bw_demand());
    EXPECT_DOUBLE_EQ(back[i].arrival_time, w[i].arrival_time);
  }
  EXPECT_THROW(load_workload("{\"id\": 1}\n"), ParseError);
}

TEST(DecisionIo, RoundTripAndInvalidHop) {
  const CpnTopology g = make_topology({10, 10, 10}, {{0, 1, 10}, {1, 2, 10}});
  MappingDecision d{3, Assignment({0, 2}), {}};
  d.flows[0] = make_path(g, {0, 1, 2});
  EXPECT_EQ(decision_from_json(decision_to_json(d), g), d);

  nlohmann::json j = decision_to_json(d);
  j["flows"][0]["path"] = {0, 2};
  const ServiceEntity e = make_entity({3, 2}, {{0, 1, 4}}, 3);
  EXPECT_TRUE(validate_decision(g, e, decision_from_json(j, g)).violates(4));
}
