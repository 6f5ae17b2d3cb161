#pragma once

// Proportional-weight k-way partitioning of a service entity onto computing
// nodes: each supported CN receives a fixed share of the total CPU demand
// while the bandwidth of LLs crossing CN boundaries is minimised.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sem/model.hpp"

namespace sem {

/// Per-CN share of the request's total CPU demand, indexed by NodeId.
struct ProportionWeights {
  std::vector<double> weights;

  ProportionWeights() = default;
  explicit ProportionWeights(std::vector<double> w) : weights(std::move(w)) {}

  /// Throws ModelError unless all weights are >= 0 and sum to 1 within 1e-9.
  void validate() const;
  std::vector<NodeId> support() const;
  std::size_t size() const { return weights.size(); }
  double operator[](NodeId m) const { return weights.at(static_cast<std::size_t>(m)); }
};

struct BalanceTolerance {
  double theta = 0.05;
};

inline constexpr double kBalanceSlack = 1e-9;

/// True iff every supported CN's demand fraction lies in
/// [(1-theta) rho, (1+theta) rho] and no SF sits on a zero-weight CN.
bool check_balance(const ServiceEntity& entity, const Assignment& assignment, const ProportionWeights& pwv,
                   BalanceTolerance tol);

/// rho_m = load on m / total demand, over `node_count` CNs.
ProportionWeights pwv_from_assignment(const ServiceEntity& entity, const Assignment& assignment,
                                      std::size_t node_count);

struct PartitionResult {
  Assignment assignment;
  Units cut = 0;
  double theta_used = 0.0;  // tolerance actually satisfied (after any relaxation)
};

struct PartitionOptions {
  int trials = 4;              // independent seeded initial partitions
  int refinement_passes = 8;   // per level
  double relax_step = 0.05;
  double relax_limit = 0.25;
  std::size_t coarsen_floor = 12;  // stop coarsening at or below this many vertices
  std::size_t balance_search_budget = 20000;  // DFS expansions when greedy repair stalls; 0 disables
};

/// Multilevel heuristic: heavy-edge coarsening, proportional greedy growing,
/// then balance repair plus boundary move/swap refinement on every level.
/// Returns nullopt when no balanced capacity-respecting assignment is found,
/// even after relaxing theta in relax_step increments up to relax_limit.
std::optional<PartitionResult> partition_heuristic(const ServiceEntity& entity, const ProportionWeights& pwv,
                                                   BalanceTolerance tol, std::span<const Units> capacities,
                                                   std::uint64_t seed, const PartitionOptions& options = {});

/// Exhaustive minimum-cut balanced assignment (lexicographically smallest on
/// ties). Throws ContractError when the entity has more than `max_sfs` SFs.
std::optional<PartitionResult> partition_exact(const ServiceEntity& entity, const ProportionWeights& pwv,
                                               BalanceTolerance tol, std::span<const Units> capacities,
                                               std::size_t max_sfs = 12);

}  // namespace sem
