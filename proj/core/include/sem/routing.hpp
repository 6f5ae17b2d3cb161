#pragma once

// Candidate tunnels between CN pairs and greedy integral mapping of Cut-LLs
// onto them under link capacities.

#include <optional>
#include <span>
#include <vector>

#include "sem/model.hpp"

namespace sem {

/// Up to k loop-free paths per unordered CN pair, ascending by hop count with
/// ties broken by lexicographic node sequence. Paths for pair (a, b) with
/// a < b are stored oriented a -> b. Immutable after construction.
class PathTable {
 public:
  PathTable() = default;
  PathTable(std::size_t node_count, std::size_t k_paths, std::vector<std::vector<Path>> entries);

  std::size_t node_count() const { return n_; }
  std::size_t k_paths() const { return k_; }

  /// Candidates for the pair, oriented a < b.
  std::span<const Path> candidates(NodeId a, NodeId b) const;

  /// Candidate i re-oriented to run from `from` to `to`.
  Path oriented(NodeId from, NodeId to, std::size_t i) const;

 private:
  std::size_t index(NodeId a, NodeId b) const;

  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<std::vector<Path>> entries_;  // upper-triangular, row-major
};

/// k shortest loop-free paths from source to target by hop count, via
/// deviation-based (Yen) enumeration with lexicographic tie-breaking.
std::vector<Path> k_shortest_paths(const CpnTopology& topology, NodeId source, NodeId target, std::size_t k);

PathTable precompute_k_paths(const CpnTopology& topology, std::size_t k_paths);

/// Assigns each Cut-LL exactly one candidate tunnel. LLs are processed in
/// descending bandwidth order (ties by index); each takes the cheapest
/// candidate that fits the running residual bandwidth ledger. Returns
/// nullopt if some Cut-LL has no feasible candidate.
std::optional<FlowMap> map_cut_links(const CpnTopology& topology, const ServiceEntity& entity,
                                     std::span<const LlIndex> cut_lls, const Assignment& assignment,
                                     const PathTable& table);

/// Sum over flows of hop count times bandwidth demand.
Units flow_cost(const FlowMap& flows, const ServiceEntity& entity);

}  // namespace sem
