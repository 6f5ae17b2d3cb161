#pragma once

// Test-only builders and independent reference computations. Nothing here
// calls into the code under test beyond plain data types.

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sem/model.hpp"

namespace semtest {

using sem::CpnTopology;
using sem::NodeId;
using sem::ServiceEntity;
using sem::Units;

/// Topology with availability equal to capacity.
CpnTopology make_topology(const std::vector<Units>& cpu, const std::vector<std::tuple<int, int, Units>>& links);

ServiceEntity make_entity(const std::vector<Units>& cpu, const std::vector<std::tuple<int, int, Units>>& lls,
                          sem::RequestId id = 0);

/// Every simple path from s to t as node sequences, ordered by (length, lexicographic).
std::vector<std::vector<NodeId>> all_simple_paths(const CpnTopology& g, NodeId s, NodeId t);

/// Minimum cut bandwidth over all placements meeting the proportion band
/// (integer form: (1-theta) rho D <= load <= (1+theta) rho D), zero-weight
/// exclusion, and capacities. Plain enumeration.
std::optional<Units> brute_min_cut(const ServiceEntity& e, const std::vector<double>& rho, double theta,
                                   const std::vector<Units>& caps);

/// Cheapest choice of one path per Cut-LL among `paths[i]` (node sequences)
/// under link capacities, by full enumeration. nullopt if none fits.
std::optional<Units> brute_route(const CpnTopology& g, const std::vector<Units>& bw,
                                 const std::vector<std::vector<std::vector<NodeId>>>& paths);

/// Dense power iteration for the resource-weighted random walk.
std::vector<double> reference_walk(const CpnTopology& g, double damping, int iters);

/// One-sided Mann-Whitney U test, normal approximation with tie correction:
/// p-value for "a tends to be larger than b".
double mann_whitney_greater(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace semtest
