#include "sem/routing.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

namespace sem {

namespace {

struct PathOrder {
  bool operator()(const std::vector<NodeId>& a, const std::vector<NodeId>& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

// Lexicographically smallest shortest path avoiding blocked nodes/links.
std::optional<std::vector<NodeId>> shortest_lex(const CpnTopology& g, NodeId source, NodeId target,
                                                const std::vector<char>& blocked_node,
                                                const std::vector<char>& blocked_link) {
  const auto n = g.node_count();
  constexpr int kInf = -1;
  std::vector<int> dist(n, kInf);
  std::queue<NodeId> q;
  dist[static_cast<std::size_t>(target)] = 0;
  q.push(target);
  while (!q.empty()) {
    NodeId cur = q.front();
    q.pop();
    if (cur == source) break;
    for (const Neighbor& nb : g.neighbors(cur)) {
      auto idx = static_cast<std::size_t>(nb.node);
      if (dist[idx] != kInf || blocked_link[static_cast<std::size_t>(nb.link)]) continue;
      if (blocked_node[idx] && nb.node != source) continue;
      dist[idx] = dist[static_cast<std::size_t>(cur)] + 1;
      q.push(nb.node);
    }
  }
  if (dist[static_cast<std::size_t>(source)] == kInf) return std::nullopt;
  std::vector<NodeId> out{source};
  NodeId cur = source;
  while (cur != target) {
    const int want = dist[static_cast<std::size_t>(cur)] - 1;
    NodeId step = -1;
    for (const Neighbor& nb : g.neighbors(cur)) {  // neighbors are sorted by id
      if (blocked_link[static_cast<std::size_t>(nb.link)]) continue;
      if (dist[static_cast<std::size_t>(nb.node)] == want) {
        step = nb.node;
        break;
      }
    }
    out.push_back(step);
    cur = step;
  }
  return out;
}

}  // namespace

PathTable::PathTable(std::size_t node_count, std::size_t k_paths, std::vector<std::vector<Path>> entries)
    : n_(node_count), k_(k_paths), entries_(std::move(entries)) {
  if (entries_.size() != n_ * (n_ - (n_ > 0 ? 1 : 0)) / 2) throw ContractError("path table has wrong pair count");
}

std::size_t PathTable::index(NodeId a, NodeId b) const {
  if (a == b) throw ContractError("path table lookup for identical endpoints");
  auto lo = static_cast<std::size_t>(std::min(a, b));
  auto hi = static_cast<std::size_t>(std::max(a, b));
  if (hi >= n_) throw ContractError("path table lookup outside topology");
  // Row lo holds pairs (lo, lo+1..n-1).
  return lo * n_ - lo * (lo + 1) / 2 + (hi - lo - 1);
}

std::span<const Path> PathTable::candidates(NodeId a, NodeId b) const { return entries_[index(a, b)]; }

Path PathTable::oriented(NodeId from, NodeId to, std::size_t i) const {
  const Path& p = entries_[index(from, to)].at(i);
  return from < to ? p : p.reversed();
}

std::vector<Path> k_shortest_paths(const CpnTopology& topology, NodeId source, NodeId target, std::size_t k) {
  if (k == 0) throw ContractError("k_paths must be >= 1");
  if (source == target) return {};
  const auto n = topology.node_count();
  std::vector<char> blocked_node(n, 0);
  std::vector<char> blocked_link(topology.link_count(), 0);

  std::vector<std::vector<NodeId>> accepted;
  auto first = shortest_lex(topology, source, target, blocked_node, blocked_link);
  if (!first) return {};
  accepted.push_back(std::move(*first));
  std::set<std::vector<NodeId>, PathOrder> pending;

  while (accepted.size() < k) {
    const std::vector<NodeId>& last = accepted.back();
    for (std::size_t i = 0; i + 1 < last.size(); ++i) {
      const NodeId spur = last[i];
      std::fill(blocked_node.begin(), blocked_node.end(), 0);
      std::fill(blocked_link.begin(), blocked_link.end(), 0);
      for (const auto& p : accepted)
        if (p.size() > i + 1 && std::equal(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(i) + 1, last.begin()))
          blocked_link[static_cast<std::size_t>(*topology.find_link(p[i], p[i + 1]))] = 1;
      for (std::size_t j = 0; j < i; ++j) blocked_node[static_cast<std::size_t>(last[j])] = 1;
      auto tail = shortest_lex(topology, spur, target, blocked_node, blocked_link);
      if (!tail) continue;
      std::vector<NodeId> candidate(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(i));
      candidate.insert(candidate.end(), tail->begin(), tail->end());
      if (std::find(accepted.begin(), accepted.end(), candidate) == accepted.end()) pending.insert(std::move(candidate));
    }
    if (pending.empty()) break;
    accepted.push_back(*pending.begin());
    pending.erase(pending.begin());
  }

  std::vector<Path> out;
  out.reserve(accepted.size());
  for (auto& nodes : accepted) out.push_back(make_path(topology, std::move(nodes)));
  return out;
}

PathTable precompute_k_paths(const CpnTopology& topology, std::size_t k_paths) {
  if (k_paths == 0) throw ContractError("k_paths must be >= 1");
  const auto n = topology.node_count();
  std::vector<std::vector<Path>> entries;
  entries.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      entries.push_back(k_shortest_paths(topology, static_cast<NodeId>(a), static_cast<NodeId>(b), k_paths));
  return PathTable(n, k_paths, std::move(entries));
}

std::optional<FlowMap> map_cut_links(const CpnTopology& topology, const ServiceEntity& entity,
                                     std::span<const LlIndex> cut_lls, const Assignment& assignment,
                                     const PathTable& table) {
  std::vector<LlIndex> order(cut_lls.begin(), cut_lls.end());
  std::stable_sort(order.begin(), order.end(), [&](LlIndex a, LlIndex b) {
    Units ba = entity.lls[static_cast<std::size_t>(a)].bw_demand;
    Units bb = entity.lls[static_cast<std::size_t>(b)].bw_demand;
    if (ba != bb) return ba > bb;
    return a < b;
  });

  std::vector<Units> residual(topology.link_count());
  for (std::size_t l = 0; l < residual.size(); ++l) residual[l] = topology.link(static_cast<LinkId>(l)).bw_available;

  FlowMap flows;
  for (LlIndex idx : order) {
    const LogicalLink& ll = entity.lls[static_cast<std::size_t>(idx)];
    const NodeId from = assignment[ll.u];
    const NodeId to = assignment[ll.v];
    if (from == to || from == kUnplaced || to == kUnplaced)
      throw ContractError("map_cut_links given an LL that is not cut");
    auto cands = table.candidates(from, to);
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < cands.size() && !chosen; ++i) {
      bool fits = std::all_of(cands[i].links.begin(), cands[i].links.end(),
                              [&](LinkId l) { return residual[static_cast<std::size_t>(l)] >= ll.bw_demand; });
      if (fits) chosen = i;
    }
    if (!chosen) return std::nullopt;
    Path p = table.oriented(from, to, *chosen);
    for (LinkId l : p.links) residual[static_cast<std::size_t>(l)] -= ll.bw_demand;
    flows.emplace(idx, std::move(p));
  }
  return flows;
}

Units flow_cost(const FlowMap& flows, const ServiceEntity& entity) {
  Units total = 0;
  for (const auto& [ll, path] : flows)
    total += static_cast<Units>(path.hops()) * entity.lls.at(static_cast<std::size_t>(ll)).bw_demand;
  return total;
}

}  // namespace sem
