#include "sem/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "sem/accounting.hpp"

namespace sem {

NodeRanking rw_rank(const CpnTopology& topology, double damping, std::size_t iters) {
  if (!(damping >= 0.0 && damping <= 1.0)) throw ContractError("rw_rank damping must lie in [0, 1]");
  const std::size_t n = topology.node_count();
  std::vector<double> mass(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double bw = 0.0;
    for (const Neighbor& nb : topology.neighbors(static_cast<NodeId>(m)))
      bw += static_cast<double>(topology.link(nb.link).bw_available);
    mass[m] = static_cast<double>(topology.node(static_cast<NodeId>(m)).cpu_available) * bw;
  }
  double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(mass.begin(), mass.end(), 1.0);
    total = static_cast<double>(n);
  }
  for (double& v : mass) v /= total;

  std::vector<double> score = mass;
  std::vector<double> next(n);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t m = 0; m < n; ++m) next[m] = (1.0 - damping) * mass[m];
    for (std::size_t j = 0; j < n; ++j) {
      const auto& nbrs = topology.neighbors(static_cast<NodeId>(j));
      double out = 0.0;
      for (const Neighbor& nb : nbrs)
        out += static_cast<double>(topology.link(nb.link).bw_available) * mass[static_cast<std::size_t>(nb.node)];
      if (!(out > 0.0)) {
        for (std::size_t m = 0; m < n; ++m) next[m] += damping * score[j] * mass[m];
        continue;
      }
      for (const Neighbor& nb : nbrs) {
        const double w = static_cast<double>(topology.link(nb.link).bw_available) * mass[static_cast<std::size_t>(nb.node)];
        next[static_cast<std::size_t>(nb.node)] += damping * score[j] * w / out;
      }
    }
    score.swap(next);
  }

  NodeRanking r;
  r.scores = std::move(score);
  r.order.resize(n);
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](NodeId a, NodeId b) {
    return r.scores[static_cast<std::size_t>(a)] > r.scores[static_cast<std::size_t>(b)];
  });
  return r;
}

std::optional<MappingDecision> rw_bfs_map(const ServiceEntity& entity, const CpnTopology& topology,
                                          const NodeRanking& ranking, const PathTable& table) {
  const std::size_t n = entity.sfs.size();
  if (n == 0) return std::nullopt;
  auto residual = topology.cpu_available();
  const auto adj = entity_adjacency(entity);

  std::size_t root = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (entity.sfs[i].cpu_demand > entity.sfs[root].cpu_demand) root = i;

  Assignment x = Assignment::unplaced(n);
  std::vector<SfIndex> parent(n, -1);
  std::vector<char> seen(n, 0);
  std::queue<SfIndex> queue;
  queue.push(static_cast<SfIndex>(root));
  seen[root] = 1;
  while (!queue.empty()) {
    const SfIndex s = queue.front();
    queue.pop();
    const Units demand = entity.sfs[static_cast<std::size_t>(s)].cpu_demand;
    NodeId host = kUnplaced;
    if (parent[static_cast<std::size_t>(s)] >= 0) {
      const NodeId p = x[parent[static_cast<std::size_t>(s)]];
      if (residual[static_cast<std::size_t>(p)] >= demand) host = p;
    }
    if (host == kUnplaced)
      for (NodeId m : ranking.order)
        if (residual[static_cast<std::size_t>(m)] >= demand) {
          host = m;
          break;
        }
    if (host == kUnplaced) return std::nullopt;
    residual[static_cast<std::size_t>(host)] -= demand;
    x.placement[static_cast<std::size_t>(s)] = host;
    for (const auto& [t, ll] : adj[static_cast<std::size_t>(s)]) {
      if (seen[static_cast<std::size_t>(t)]) continue;
      seen[static_cast<std::size_t>(t)] = 1;
      parent[static_cast<std::size_t>(t)] = s;
      queue.push(t);
    }
  }

  const auto cut = cut_links(entity, x);
  auto flows = map_cut_links(topology, entity, cut, x, table);
  if (!flows) return std::nullopt;
  return MappingDecision{entity.id, std::move(x), std::move(*flows)};
}

}  // namespace sem
