#pragma once

// Brute-force references for tiny instances: exact mapping optimum, exact
// balanced partition, and the equivalence checks built on them.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sem/model.hpp"
#include "sem/partition.hpp"

namespace sem {

struct OracleBounds {
  std::size_t max_sfs = 6;
  std::size_t max_nodes = 4;
};

struct SolverComparison {
  std::string solver;
  bool feasible = false;
  std::optional<Units> cost;
  std::optional<double> gap;  // (cost - optimum) / optimum
};

struct OracleReport {
  std::string instance;
  std::optional<Units> optimum_cost;  // nullopt when infeasible
  std::optional<MappingDecision> optimal_decision;
  std::vector<SolverComparison> comparison;

  /// Adds a heuristic result; cost is nullopt for a rejection.
  void compare(std::string solver, std::optional<Units> cost);
};

nlohmann::json to_json(const OracleReport& report);

/// Minimum-cost decision over every total assignment and every per-Cut-LL
/// candidate path choice (k_paths per CN pair) satisfying all capacity
/// constraints. Throws ContractError above the bounds.
OracleReport brute_force_p2a(const CpnTopology& topology, const ServiceEntity& entity, std::size_t k_paths,
                             OracleBounds bounds = {});

/// Exact minimum-cut balanced partition, with the multilevel heuristic's
/// cut recorded as a comparison. The "cost" here is cut bandwidth.
OracleReport brute_force_pwkgpp(const ServiceEntity& entity, const ProportionWeights& pwv, BalanceTolerance tol,
                                std::span<const Units> capacities, std::size_t max_sfs = 12);

using BalancePredicate =
    std::function<bool(const ServiceEntity&, const Assignment&, const ProportionWeights&, BalanceTolerance)>;

struct CheckReport {
  bool pass = false;
  std::string detail;
  std::optional<Units> lhs;  // constrained optimum or nested-solve cost
  std::optional<Units> rhs;  // unconstrained optimum or brute-force cost
};

/// Minimum-cut placement by plain enumeration versus the proportion-constrained
/// form: the optimum's own proportion vector must admit it at zero tolerance,
/// and the best cut over all attainable proportion vectors must match.
CheckReport verify_theorem2(const ServiceEntity& entity, const CpnTopology& topology,
                            const BalancePredicate& balance = check_balance, OracleBounds bounds = {});

/// Nested (proportion-outer, exact-inner) optimum equals the flat optimum.
CheckReport verify_proposition1(const ServiceEntity& entity, const CpnTopology& topology, std::size_t k_paths = 64,
                                OracleBounds bounds = {});

/// Graph-bisection gadget: one unit-demand SF per vertex and one LL per edge;
/// three CNs on a path n1 - n3 - n2 where n3 has no spare CPU and the end
/// CNs hold ceil(|V|/2) and floor(|V|/2).
struct Gadget {
  ServiceEntity entity;
  CpnTopology topology;
};
Gadget make_bisection_gadget(std::size_t n_vertices, std::span<const std::pair<int, int>> edges,
                             std::span<const Units> edge_weights);

/// Minimum total edge weight across a floor/ceil split of the vertices.
Units min_bisection_cut(const ServiceEntity& entity);

struct TinyInstance {
  ServiceEntity entity;
  CpnTopology topology;
};
/// Connected 2-4 CN topology and a 2-6 SF entity.
TinyInstance random_tiny_instance(std::uint64_t seed);
Gadget random_bisection_gadget(std::uint64_t seed);

/// Runs `n` instances of each check from `seed`; the JSON carries per-check
/// pass counts and an overall verdict.
nlohmann::json oracle_sweep(std::size_t n, std::uint64_t seed);

}  // namespace sem
