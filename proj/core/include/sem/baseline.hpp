#pragma once

// RW-BFS baseline: random-walk node ranking followed by a breadth-first walk
// over the request graph, with SF co-location allowed.

#include <optional>
#include <vector>

#include "sem/model.hpp"
#include "sem/routing.hpp"

namespace sem {

struct NodeRanking {
  std::vector<double> scores;  // indexed by NodeId
  std::vector<NodeId> order;   // descending score, ties by id
};

/// Power iteration on the resource-weighted walk. Node mass is
/// cpu_available * (sum of incident bw_available); a step from j moves to
/// neighbour m with probability proportional to bw(j, m) * mass(m).
NodeRanking rw_rank(const CpnTopology& topology, double damping = 0.85, std::size_t iters = 50);

/// nullopt is a rejection.
std::optional<MappingDecision> rw_bfs_map(const ServiceEntity& entity, const CpnTopology& topology,
                                          const NodeRanking& ranking, const PathTable& table);

}  // namespace sem
