#include "sem/model.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <string>

namespace sem {

namespace {

bool connected(std::size_t n, const std::vector<std::vector<Neighbor>>& adj) {
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::queue<NodeId> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t visited = 1;
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop();
    for (const Neighbor& nb : adj[static_cast<std::size_t>(cur)]) {
      auto idx = static_cast<std::size_t>(nb.node);
      if (!seen[idx]) {
        seen[idx] = 1;
        ++visited;
        frontier.push(nb.node);
      }
    }
  }
  return visited == n;
}

std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

CpnTopology::CpnTopology(std::vector<CpnNode> nodes, std::vector<CpnLink> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  const auto n = nodes_.size();
  if (n == 0) throw ModelError("topology has no nodes");
  for (std::size_t i = 0; i < n; ++i) {
    const CpnNode& node = nodes_[i];
    if (node.id != static_cast<NodeId>(i))
      throw ModelError("node ids must be dense and ordered; got " + std::to_string(node.id) + " at position " +
                       std::to_string(i));
    if (node.cpu_capacity <= 0) throw ModelError("node " + std::to_string(i) + " has non-positive CPU capacity");
    if (node.cpu_available < 0 || node.cpu_available > node.cpu_capacity)
      throw ModelError("node " + std::to_string(i) + " availability outside [0, capacity]");
  }
  adjacency_.assign(n, {});
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const CpnLink& l = links_[i];
    const std::string tag = "link " + std::to_string(l.u) + "-" + std::to_string(l.v);
    if (l.u < 0 || l.v < 0 || static_cast<std::size_t>(l.u) >= n || static_cast<std::size_t>(l.v) >= n)
      throw ModelError(tag + " references an unknown node");
    if (l.u == l.v) throw ModelError(tag + " is a self-loop");
    if (l.bw_capacity < 0 || l.bw_available < 0 || l.bw_available > l.bw_capacity)
      throw ModelError(tag + " bandwidth availability outside [0, capacity]");
    auto key = ordered(l.u, l.v);
    if (!link_index_.emplace(key, static_cast<LinkId>(i)).second) throw ModelError(tag + " is a duplicate edge");
    adjacency_[static_cast<std::size_t>(l.u)].push_back({l.v, static_cast<LinkId>(i)});
    adjacency_[static_cast<std::size_t>(l.v)].push_back({l.u, static_cast<LinkId>(i)});
  }
  for (auto& list : adjacency_)
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  if (!connected(n, adjacency_)) throw ModelError("topology is disconnected");
}

std::optional<LinkId> CpnTopology::find_link(NodeId a, NodeId b) const {
  auto it = link_index_.find(ordered(a, b));
  if (it == link_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Units> CpnTopology::cpu_available() const {
  std::vector<Units> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.cpu_available);
  return out;
}

Units CpnTopology::total_cpu_capacity() const {
  return std::accumulate(nodes_.begin(), nodes_.end(), Units{0},
                         [](Units s, const CpnNode& n) { return s + n.cpu_capacity; });
}

Units CpnTopology::total_cpu_available() const {
  return std::accumulate(nodes_.begin(), nodes_.end(), Units{0},
                         [](Units s, const CpnNode& n) { return s + n.cpu_available; });
}

Units CpnTopology::total_bw_capacity() const {
  return std::accumulate(links_.begin(), links_.end(), Units{0},
                         [](Units s, const CpnLink& l) { return s + l.bw_capacity; });
}

Units CpnTopology::total_bw_available() const {
  return std::accumulate(links_.begin(), links_.end(), Units{0},
                         [](Units s, const CpnLink& l) { return s + l.bw_available; });
}

void CpnTopology::debit_cpu(NodeId id, Units amount) {
  CpnNode& node = nodes_.at(static_cast<std::size_t>(id));
  if (amount < 0 || amount > node.cpu_available) throw ContractError("CPU debit exceeds availability");
  node.cpu_available -= amount;
}

void CpnTopology::credit_cpu(NodeId id, Units amount) {
  CpnNode& node = nodes_.at(static_cast<std::size_t>(id));
  if (amount < 0 || node.cpu_available + amount > node.cpu_capacity)
    throw ContractError("CPU credit exceeds capacity");
  node.cpu_available += amount;
}

void CpnTopology::debit_bw(LinkId id, Units amount) {
  CpnLink& link = links_.at(static_cast<std::size_t>(id));
  if (amount < 0 || amount > link.bw_available) throw ContractError("bandwidth debit exceeds availability");
  link.bw_available -= amount;
}

void CpnTopology::credit_bw(LinkId id, Units amount) {
  CpnLink& link = links_.at(static_cast<std::size_t>(id));
  if (amount < 0 || link.bw_available + amount > link.bw_capacity)
    throw ContractError("bandwidth credit exceeds capacity");
  link.bw_available += amount;
}

bool operator==(const CpnTopology& a, const CpnTopology& b) {
  auto node_eq = [](const CpnNode& x, const CpnNode& y) {
    return x.id == y.id && x.cpu_capacity == y.cpu_capacity && x.cpu_available == y.cpu_available;
  };
  auto link_eq = [](const CpnLink& x, const CpnLink& y) {
    return x.u == y.u && x.v == y.v && x.bw_capacity == y.bw_capacity && x.bw_available == y.bw_available;
  };
  return std::equal(a.nodes_.begin(), a.nodes_.end(), b.nodes_.begin(), b.nodes_.end(), node_eq) &&
         std::equal(a.links_.begin(), a.links_.end(), b.links_.begin(), b.links_.end(), link_eq);
}

Units ServiceEntity::total_cpu_demand() const {
  return std::accumulate(sfs.begin(), sfs.end(), Units{0},
                         [](Units s, const ServiceFunction& f) { return s + f.cpu_demand; });
}

Units ServiceEntity::total_bw_demand() const {
  return std::accumulate(lls.begin(), lls.end(), Units{0},
                         [](Units s, const LogicalLink& l) { return s + l.bw_demand; });
}

void validate_entity(const ServiceEntity& entity) {
  const std::string tag = "service entity " + std::to_string(entity.id);
  if (entity.sfs.empty()) throw ModelError(tag + " has no service functions");
  if (entity.arrival_time < 0.0) throw ModelError(tag + " has negative arrival time");
  if (!(entity.lifetime > 0.0)) throw ModelError(tag + " has non-positive lifetime");
  for (const auto& sf : entity.sfs)
    if (sf.cpu_demand <= 0) throw ModelError(tag + ": SF " + std::to_string(sf.id) + " has non-positive demand");
  const auto n = static_cast<SfIndex>(entity.sfs.size());
  std::set<std::pair<SfIndex, SfIndex>> seen;
  for (const auto& ll : entity.lls) {
    if (ll.u < 0 || ll.v < 0 || ll.u >= n || ll.v >= n) throw ModelError(tag + ": LL references unknown SF");
    if (ll.u == ll.v) throw ModelError(tag + ": LL is a self-loop");
    if (ll.bw_demand <= 0) throw ModelError(tag + ": LL has non-positive bandwidth demand");
    if (!seen.insert(ordered(ll.u, ll.v)).second) throw ModelError(tag + ": duplicate LL");
  }
  auto adj = entity_adjacency(entity);
  std::vector<char> reached(entity.sfs.size(), 0);
  std::vector<SfIndex> stack{0};
  reached[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    SfIndex cur = stack.back();
    stack.pop_back();
    for (auto [nb, ll] : adj[static_cast<std::size_t>(cur)]) {
      if (!reached[static_cast<std::size_t>(nb)]) {
        reached[static_cast<std::size_t>(nb)] = 1;
        ++count;
        stack.push_back(nb);
      }
    }
  }
  if (count != entity.sfs.size()) throw ModelError(tag + " is disconnected");
}

std::vector<std::vector<std::pair<SfIndex, LlIndex>>> entity_adjacency(const ServiceEntity& entity) {
  std::vector<std::vector<std::pair<SfIndex, LlIndex>>> adj(entity.sfs.size());
  for (std::size_t i = 0; i < entity.lls.size(); ++i) {
    const auto& ll = entity.lls[i];
    adj[static_cast<std::size_t>(ll.u)].emplace_back(ll.v, static_cast<LlIndex>(i));
    adj[static_cast<std::size_t>(ll.v)].emplace_back(ll.u, static_cast<LlIndex>(i));
  }
  return adj;
}

bool Assignment::total() const {
  return std::none_of(placement.begin(), placement.end(), [](NodeId n) { return n == kUnplaced; });
}

Path Path::reversed() const {
  Path p{nodes, links};
  std::reverse(p.nodes.begin(), p.nodes.end());
  std::reverse(p.links.begin(), p.links.end());
  return p;
}

Path make_path(const CpnTopology& topology, std::vector<NodeId> nodes) {
  Path p;
  p.links.reserve(nodes.empty() ? 0 : nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto l = topology.find_link(nodes[i], nodes[i + 1]);
    if (!l) throw ModelError("path nodes " + std::to_string(nodes[i]) + " and " + std::to_string(nodes[i + 1]) +
                             " are not adjacent");
    p.links.push_back(*l);
  }
  p.nodes = std::move(nodes);
  return p;
}

void ProfitParams::validate() const {
  if (!(profit_exponent >= 1.0)) throw ModelError("profit_exponent must be >= 1");
  if (!(cost_weight > 0.0 && cost_weight < 1.0)) throw ModelError("cost_weight must lie in (0, 1)");
}

}  // namespace sem
