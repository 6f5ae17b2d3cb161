#pragma once

// Substrate (computing power network) and request (service entity) data model.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sem {

using NodeId = std::int32_t;     // computing node index, dense 0..n-1
using LinkId = std::int32_t;     // network link index, dense 0..m-1
using SfIndex = std::int32_t;    // service function index within an entity
using LlIndex = std::int32_t;    // logical link index within an entity
using RequestId = std::int64_t;
using Units = std::int64_t;      // CPU and bandwidth quantities are integral
using SimTime = double;

inline constexpr NodeId kUnplaced = -1;

/// Raised when an input violates a structural invariant (bad topology,
/// malformed entity, out-of-range parameter).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a caller breaks an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct CpnNode {
  NodeId id = 0;
  Units cpu_capacity = 0;
  Units cpu_available = 0;
};

struct CpnLink {
  NodeId u = 0;
  NodeId v = 0;
  Units bw_capacity = 0;
  Units bw_available = 0;

  NodeId other(NodeId end) const { return end == u ? v : u; }
};

struct Neighbor {
  NodeId node;
  LinkId link;
};

/// Undirected, connected substrate graph. Construction validates the
/// structural invariants; availability is mutated only through the
/// debit/credit calls used by the resource ledger.
class CpnTopology {
 public:
  CpnTopology() = default;
  CpnTopology(std::vector<CpnNode> nodes, std::vector<CpnLink> links);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  const CpnNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const CpnLink& link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
  std::span<const CpnNode> nodes() const { return nodes_; }
  std::span<const CpnLink> links() const { return links_; }

  /// Neighbors sorted by node id.
  std::span<const Neighbor> neighbors(NodeId id) const {
    return adjacency_.at(static_cast<std::size_t>(id));
  }

  std::optional<LinkId> find_link(NodeId a, NodeId b) const;

  /// Current CPU availability per node, indexed by NodeId.
  std::vector<Units> cpu_available() const;
  Units total_cpu_capacity() const;
  Units total_cpu_available() const;
  Units total_bw_capacity() const;
  Units total_bw_available() const;

  void debit_cpu(NodeId id, Units amount);
  void credit_cpu(NodeId id, Units amount);
  void debit_bw(LinkId id, Units amount);
  void credit_bw(LinkId id, Units amount);

  friend bool operator==(const CpnTopology& a, const CpnTopology& b);

 private:
  std::vector<CpnNode> nodes_;
  std::vector<CpnLink> links_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::map<std::pair<NodeId, NodeId>, LinkId> link_index_;
};

struct ServiceFunction {
  std::int64_t id = 0;  // external identifier, as read from workload files
  Units cpu_demand = 0;
};

struct LogicalLink {
  SfIndex u = 0;
  SfIndex v = 0;
  Units bw_demand = 0;
};

struct ServiceEntity {
  RequestId id = 0;
  std::vector<ServiceFunction> sfs;
  std::vector<LogicalLink> lls;
  SimTime arrival_time = 0.0;
  SimTime lifetime = 1.0;

  std::size_t size() const { return sfs.size(); }
  Units total_cpu_demand() const;
  Units total_bw_demand() const;
};

/// Throws ModelError unless the entity is a connected undirected simple graph
/// with positive demands, arrival_time >= 0 and lifetime > 0.
void validate_entity(const ServiceEntity& entity);

/// Adjacency list of an entity: for each SF, the (neighbor SF, LL index) pairs.
std::vector<std::vector<std::pair<SfIndex, LlIndex>>> entity_adjacency(const ServiceEntity& entity);

/// placement[sf] = hosting node, or kUnplaced.
struct Assignment {
  std::vector<NodeId> placement;

  Assignment() = default;
  explicit Assignment(std::vector<NodeId> p) : placement(std::move(p)) {}
  static Assignment unplaced(std::size_t n) { return Assignment(std::vector<NodeId>(n, kUnplaced)); }

  NodeId operator[](SfIndex sf) const { return placement.at(static_cast<std::size_t>(sf)); }
  std::size_t size() const { return placement.size(); }
  bool total() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// A loop-free node sequence; links[i] joins nodes[i] and nodes[i+1].
struct Path {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;

  std::size_t hops() const { return links.size(); }
  NodeId source() const { return nodes.front(); }
  NodeId target() const { return nodes.back(); }
  Path reversed() const;

  friend bool operator==(const Path&, const Path&) = default;
};

/// Builds a path from a node sequence, resolving links. Throws ModelError if
/// consecutive nodes are not adjacent.
Path make_path(const CpnTopology& topology, std::vector<NodeId> nodes);

using FlowMap = std::map<LlIndex, Path>;

struct MappingDecision {
  RequestId entity_id = 0;
  Assignment assignment;
  FlowMap flows;

  friend bool operator==(const MappingDecision&, const MappingDecision&) = default;
};

struct ProfitParams {
  double profit_exponent = 2.0;
  double cost_weight = 0.5;

  void validate() const;
};

}  // namespace sem
