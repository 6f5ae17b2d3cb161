#include "sem/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <set>

#include "sem/accounting.hpp"
#include "sem/generate.hpp"
#include "sem/io.hpp"
#include "sem/routing.hpp"
#include "sem/search.hpp"

namespace sem {

void OracleReport::compare(std::string solver, std::optional<Units> cost) {
  SolverComparison c;
  c.solver = std::move(solver);
  c.feasible = cost.has_value();
  c.cost = cost;
  if (cost && optimum_cost) {
    const double opt = static_cast<double>(*optimum_cost);
    c.gap = opt > 0.0 ? (static_cast<double>(*cost) - opt) / opt : (*cost == 0 ? 0.0 : INFINITY);
  }
  comparison.push_back(std::move(c));
}

nlohmann::json to_json(const OracleReport& report) {
  nlohmann::json j;
  j["instance"] = report.instance;
  j["optimum_cost"] = report.optimum_cost ? nlohmann::json(*report.optimum_cost) : nlohmann::json(nullptr);
  if (report.optimal_decision) j["optimal_decision"] = decision_to_json(*report.optimal_decision);
  j["comparison"] = nlohmann::json::array();
  for (const auto& c : report.comparison) {
    nlohmann::json e{{"solver", c.solver}, {"feasible", c.feasible}};
    e["cost"] = c.cost ? nlohmann::json(*c.cost) : nlohmann::json(nullptr);
    e["gap"] = c.gap && std::isfinite(*c.gap) ? nlohmann::json(*c.gap) : nlohmann::json(nullptr);
    j["comparison"].push_back(std::move(e));
  }
  return j;
}

namespace {

void check_bounds(const ServiceEntity& entity, const CpnTopology& topology, OracleBounds bounds, const char* who) {
  if (entity.sfs.size() > bounds.max_sfs || topology.node_count() > bounds.max_nodes)
    throw ContractError(std::string(who) + " refused: instance exceeds " + std::to_string(bounds.max_sfs) +
                        " SFs / " + std::to_string(bounds.max_nodes) + " CNs");
}

std::string describe(const ServiceEntity& entity, const CpnTopology& topology) {
  return std::to_string(entity.sfs.size()) + " SFs, " + std::to_string(entity.lls.size()) + " LLs on " +
         std::to_string(topology.node_count()) + " CNs / " + std::to_string(topology.link_count()) + " links";
}

// Calls f(assignment) for every total assignment of n SFs onto k CNs.
template <typename F>
void for_each_assignment(std::size_t n, std::size_t k, F&& f) {
  Assignment x(std::vector<NodeId>(n, 0));
  for (;;) {
    f(static_cast<const Assignment&>(x));
    std::size_t pos = 0;
    while (pos < n && ++x.placement[pos] == static_cast<NodeId>(k)) x.placement[pos++] = 0;
    if (pos == n) return;
  }
}

std::vector<Units> loads_of(const ServiceEntity& entity, const Assignment& x, std::size_t k) {
  std::vector<Units> load(k, 0);
  for (std::size_t i = 0; i < entity.sfs.size(); ++i) load[static_cast<std::size_t>(x.placement[i])] += entity.sfs[i].cpu_demand;
  return load;
}

bool fits(const std::vector<Units>& load, const std::vector<Units>& caps) {
  for (std::size_t m = 0; m < load.size(); ++m)
    if (load[m] > caps[m]) return false;
  return true;
}

}  // namespace

OracleReport brute_force_p2a(const CpnTopology& topology, const ServiceEntity& entity, std::size_t k_paths,
                             OracleBounds bounds) {
  check_bounds(entity, topology, bounds, "brute_force_p2a");
  OracleReport report;
  report.instance = describe(entity, topology);
  const PathTable table = precompute_k_paths(topology, k_paths);
  const std::size_t k = topology.node_count();
  const auto caps = topology.cpu_available();
  const Units node_cost = entity.total_cpu_demand();

  std::vector<Units> residual(topology.link_count());
  for (std::size_t l = 0; l < residual.size(); ++l) residual[l] = topology.link(static_cast<LinkId>(l)).bw_available;

  for_each_assignment(entity.sfs.size(), k, [&](const Assignment& x) {
    if (!fits(loads_of(entity, x, k), caps)) return;
    const auto cut = cut_links(entity, x);
    FlowMap flows;
    auto choose = [&](auto&& self, std::size_t i, Units network) -> void {
      if (report.optimum_cost && node_cost + network >= *report.optimum_cost) return;
      if (i == cut.size()) {
        report.optimum_cost = node_cost + network;
        report.optimal_decision = MappingDecision{entity.id, x, flows};
        return;
      }
      const LogicalLink& ll = entity.lls[static_cast<std::size_t>(cut[i])];
      const NodeId a = x[ll.u];
      const NodeId b = x[ll.v];
      const auto cands = table.candidates(a, b);
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const Path& p = cands[c];
        if (!std::all_of(p.links.begin(), p.links.end(),
                         [&](LinkId l) { return residual[static_cast<std::size_t>(l)] >= ll.bw_demand; }))
          continue;
        for (LinkId l : p.links) residual[static_cast<std::size_t>(l)] -= ll.bw_demand;
        flows[cut[i]] = table.oriented(a, b, c);
        self(self, i + 1, network + static_cast<Units>(p.hops()) * ll.bw_demand);
        flows.erase(cut[i]);
        for (LinkId l : p.links) residual[static_cast<std::size_t>(l)] += ll.bw_demand;
      }
    };
    choose(choose, 0, 0);
  });
  return report;
}

OracleReport brute_force_pwkgpp(const ServiceEntity& entity, const ProportionWeights& pwv, BalanceTolerance tol,
                                std::span<const Units> capacities, std::size_t max_sfs) {
  OracleReport report;
  report.instance = std::to_string(entity.sfs.size()) + " SFs, " + std::to_string(pwv.support().size()) + " parts";
  auto exact = partition_exact(entity, pwv, tol, capacities, max_sfs);
  if (exact) {
    report.optimum_cost = exact->cut;
    report.optimal_decision = MappingDecision{entity.id, exact->assignment, {}};
  }
  PartitionOptions no_relax;
  no_relax.relax_limit = 0.0;
  auto heur = partition_heuristic(entity, pwv, tol, capacities, 1, no_relax);
  report.compare("partition_heuristic", heur ? std::optional<Units>(heur->cut) : std::nullopt);
  return report;
}

CheckReport verify_theorem2(const ServiceEntity& entity, const CpnTopology& topology, const BalancePredicate& balance,
                            OracleBounds bounds) {
  check_bounds(entity, topology, bounds, "verify_theorem2");
  CheckReport r;
  const std::size_t k = topology.node_count();
  const auto caps = topology.cpu_available();

  std::optional<Assignment> best;
  Units best_cut = 0;
  std::set<std::vector<Units>> attainable;
  for_each_assignment(entity.sfs.size(), k, [&](const Assignment& x) {
    auto load = loads_of(entity, x, k);
    attainable.insert(load);
    if (!fits(load, caps)) return;
    const Units c = cut_bandwidth(entity, x);
    if (!best || c < best_cut) {
      best = x;
      best_cut = c;
    }
  });
  if (best) r.lhs = best_cut;

  const BalanceTolerance exact_tol{0.0};
  if (best) {
    const ProportionWeights rho = pwv_from_assignment(entity, *best, k);
    double sum = 0.0;
    for (double w : rho.weights) sum += w;
    if (std::abs(sum - 1.0) > 1e-9) {
      r.detail = "constructed proportions do not sum to 1";
      return r;
    }
    if (!balance(entity, *best, rho, exact_tol)) {
      r.detail = "the P3 optimum is rejected by the proportion constraint of its own proportion vector";
      return r;
    }
  }

  const double total = static_cast<double>(entity.total_cpu_demand());
  for (const auto& load : attainable) {
    std::vector<double> w(k);
    for (std::size_t m = 0; m < k; ++m) w[m] = static_cast<double>(load[m]) / total;
    auto part = partition_exact(entity, ProportionWeights(std::move(w)), exact_tol, caps, bounds.max_sfs);
    if (part && (!r.rhs || part->cut < *r.rhs)) r.rhs = part->cut;
  }

  r.pass = r.lhs == r.rhs;
  if (!r.pass)
    r.detail = "optimum mismatch: P3 " + (r.lhs ? std::to_string(*r.lhs) : std::string("infeasible")) + " vs P4 " +
               (r.rhs ? std::to_string(*r.rhs) : std::string("infeasible"));
  return r;
}

CheckReport verify_proposition1(const ServiceEntity& entity, const CpnTopology& topology, std::size_t k_paths,
                                OracleBounds bounds) {
  CheckReport r;
  const PathTable table = precompute_k_paths(topology, k_paths);
  auto nested = exhaustive_nested_solve(entity, topology, table, NestedBounds{bounds.max_sfs, bounds.max_nodes});
  const OracleReport flat = brute_force_p2a(topology, entity, k_paths, bounds);
  if (nested) {
    const ValidationReport v = validate_decision(topology, entity, *nested);
    if (!v.ok()) {
      r.detail = "nested decision invalid: " + v.summary();
      return r;
    }
    r.lhs = cost(entity, *nested);
  }
  r.rhs = flat.optimum_cost;
  r.pass = r.lhs == r.rhs;
  if (!r.pass)
    r.detail = "cost mismatch: nested " + (r.lhs ? std::to_string(*r.lhs) : std::string("infeasible")) + " vs flat " +
               (r.rhs ? std::to_string(*r.rhs) : std::string("infeasible"));
  return r;
}

Gadget make_bisection_gadget(std::size_t n_vertices, std::span<const std::pair<int, int>> edges,
                             std::span<const Units> edge_weights) {
  if (n_vertices < 2) throw ContractError("bisection gadget needs at least 2 vertices");
  if (edges.size() != edge_weights.size()) throw ContractError("one weight per gadget edge required");
  Gadget g;
  Units total_w = 0;
  for (std::size_t i = 0; i < n_vertices; ++i) g.entity.sfs.push_back({static_cast<std::int64_t>(i), 1});
  for (std::size_t i = 0; i < edges.size(); ++i) {
    g.entity.lls.push_back({edges[i].first, edges[i].second, edge_weights[i]});
    total_w += edge_weights[i];
  }
  validate_entity(g.entity);
  const auto big = static_cast<Units>(n_vertices / 2 + n_vertices % 2);
  const auto small = static_cast<Units>(n_vertices / 2);
  std::vector<CpnNode> nodes{{0, big, big}, {1, small, small}, {2, 1, 0}};
  std::vector<CpnLink> links{{0, 2, total_w + 1, total_w + 1}, {2, 1, total_w + 1, total_w + 1}};
  g.topology = CpnTopology(std::move(nodes), std::move(links));
  return g;
}

Units min_bisection_cut(const ServiceEntity& entity) {
  const std::size_t n = entity.sfs.size();
  if (n > 24) throw ContractError("min_bisection_cut refused above 24 vertices");
  const int half = static_cast<int>(n / 2);
  std::optional<Units> best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != half) continue;
    Units cut = 0;
    for (const auto& ll : entity.lls)
      if (((mask >> ll.u) & 1u) != ((mask >> ll.v) & 1u)) cut += ll.bw_demand;
    if (!best || cut < *best) best = cut;
  }
  return best.value_or(0);
}

TinyInstance random_tiny_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  const auto m = std::uniform_int_distribution<std::size_t>(n - 1, n * (n - 1) / 2)(rng);
  TinyInstance t;
  t.topology = generate_random_cpn(n, m, {4, 16}, {4, 20}, mix_seed(seed, 1));
  EntityParams ep;
  ep.size = {2, 6};
  ep.density = 0.4;
  ep.demand = {1, 8};
  t.entity = generate_service_entity(ep, mix_seed(seed, 2), 0);
  return t;
}

Gadget random_bisection_gadget(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = std::uniform_int_distribution<int>(4, 6)(rng);
  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  for (int v = 1; v < n; ++v) {
    const int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
    edges.emplace_back(u, v);
    seen.emplace(u, v);
  }
  std::bernoulli_distribution extra(0.5);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!seen.contains({u, v}) && extra(rng)) edges.emplace_back(u, v);
  std::vector<Units> weights;
  std::uniform_int_distribution<Units> wd(1, 3);
  for (std::size_t i = 0; i < edges.size(); ++i) weights.push_back(wd(rng));
  return make_bisection_gadget(static_cast<std::size_t>(n), edges, weights);
}

nlohmann::json oracle_sweep(std::size_t n, std::uint64_t seed) {
  nlohmann::json out{{"seed", seed}, {"instances", n}};
  auto tally = [](nlohmann::json& j, bool ok, std::size_t i, const std::string& detail) {
    j[ok ? "passed" : "failed"] = j.value(ok ? "passed" : "failed", 0) + 1;
    if (!ok) j["failures"].push_back({{"instance", i}, {"detail", detail}});
  };
  nlohmann::json prop1{{"passed", 0}, {"failed", 0}, {"failures", nlohmann::json::array()}};
  nlohmann::json thm2 = prop1;
  nlohmann::json gadget = prop1;
  nlohmann::json pwk{{"instances", 0}, {"heuristic_feasible", 0}, {"within_2x", 0}};

  for (std::size_t i = 0; i < n; ++i) {
    const TinyInstance t = random_tiny_instance(mix_seed(seed, 3 * i));
    const CheckReport p = verify_proposition1(t.entity, t.topology);
    tally(prop1, p.pass, i, p.detail);
    const CheckReport th = verify_theorem2(t.entity, t.topology);
    tally(thm2, th.pass, i, th.detail);

    const Gadget g = random_bisection_gadget(mix_seed(seed, 3 * i + 1));
    const OracleReport r = brute_force_p2a(g.topology, g.entity, 64);
    const Units k_cut = min_bisection_cut(g.entity);
    const bool gadget_ok = r.optimum_cost && *r.optimum_cost - g.entity.total_cpu_demand() == 2 * k_cut;
    tally(gadget, gadget_ok, i, "network cost differs from twice the bisection cut " + std::to_string(k_cut));

    std::mt19937_64 rng(mix_seed(seed, 3 * i + 2));
    EntityParams ep;
    ep.size = {4, 10};
    ep.density = 0.3;
    ep.demand = {1, 10};
    const ServiceEntity e = generate_service_entity(ep, rng(), 0);
    const auto parts = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    Assignment x = Assignment::unplaced(e.size());
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(parts - 1));
    for (auto& p : x.placement) p = pick(rng);
    const ProportionWeights pwv = pwv_from_assignment(e, x, parts);
    const std::vector<Units> caps(parts, e.total_cpu_demand());
    const OracleReport pr = brute_force_pwkgpp(e, pwv, BalanceTolerance{0.05}, caps);
    pwk["instances"] = pwk["instances"].get<int>() + 1;
    const auto& h = pr.comparison.front();
    if (h.feasible) {
      pwk["heuristic_feasible"] = pwk["heuristic_feasible"].get<int>() + 1;
      if (*h.cost <= 2 * *pr.optimum_cost) pwk["within_2x"] = pwk["within_2x"].get<int>() + 1;
    }
  }
  out["proposition1"] = prop1;
  out["theorem2"] = thm2;
  out["gadget"] = gadget;
  out["pwkgpp"] = pwk;
  out["all_passed"] = prop1["failed"] == 0 && thm2["failed"] == 0 && gadget["failed"] == 0;
  return out;
}

}  // namespace sem
