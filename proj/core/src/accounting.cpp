#include "sem/accounting.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace sem {

namespace {

void require_assignment_shape(const ServiceEntity& entity, const Assignment& assignment) {
  if (assignment.size() != entity.sfs.size())
    throw ContractError("assignment covers " + std::to_string(assignment.size()) + " SFs, entity has " +
                        std::to_string(entity.sfs.size()));
}

}  // namespace

std::vector<LlIndex> cut_links(const ServiceEntity& entity, const Assignment& assignment) {
  require_assignment_shape(entity, assignment);
  std::vector<LlIndex> out;
  for (std::size_t i = 0; i < entity.lls.size(); ++i) {
    const auto& ll = entity.lls[i];
    NodeId a = assignment[ll.u];
    NodeId b = assignment[ll.v];
    if (a == kUnplaced || b == kUnplaced) throw ContractError("cut_links: SF missing from assignment");
    if (a != b) out.push_back(static_cast<LlIndex>(i));
  }
  return out;
}

Units cut_bandwidth(const ServiceEntity& entity, const Assignment& assignment) {
  Units total = 0;
  for (LlIndex l : cut_links(entity, assignment)) total += entity.lls[static_cast<std::size_t>(l)].bw_demand;
  return total;
}

Units revenue(const ServiceEntity& entity) { return entity.total_cpu_demand() + entity.total_bw_demand(); }

Units cost(const ServiceEntity& entity, const MappingDecision& decision) {
  Units total = entity.total_cpu_demand();
  for (const auto& [ll, path] : decision.flows)
    total += static_cast<Units>(path.hops()) * entity.lls.at(static_cast<std::size_t>(ll)).bw_demand;
  return total;
}

double profit_from_totals(std::size_t accepted, std::size_t arrived, double revenue_sum, double cost_sum,
                          const ProfitParams& params) {
  if (accepted > arrived) throw ContractError("accepted count exceeds arrived count");
  if (arrived == 0) return 0.0;
  const double ratio = static_cast<double>(accepted) / static_cast<double>(arrived);
  return std::pow(ratio, params.profit_exponent) * (revenue_sum - params.cost_weight * cost_sum);
}

double profit(std::span<const AcceptedRequest> accepted, std::size_t arrived_count, const ProfitParams& params) {
  double rev = 0.0;
  double cst = 0.0;
  for (const auto& a : accepted) {
    rev += static_cast<double>(revenue(*a.entity));
    cst += static_cast<double>(cost(*a.entity, *a.decision));
  }
  return profit_from_totals(accepted.size(), arrived_count, rev, cst, params);
}

bool ValidationReport::violates(int equation) const {
  for (const auto& v : violations)
    if (v.equation == equation) return true;
  return false;
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << "(" << violations[i].equation << ") " << violations[i].message;
  }
  return out.str();
}

ValidationReport validate_decision(const CpnTopology& topology, const ServiceEntity& entity,
                                   const MappingDecision& decision) {
  ValidationReport report;
  auto add = [&](int eq, std::string msg) { report.violations.push_back({eq, std::move(msg)}); };
  const auto n_nodes = static_cast<NodeId>(topology.node_count());
  const Assignment& x = decision.assignment;

  if (decision.entity_id != entity.id)
    add(1, "decision is for request " + std::to_string(decision.entity_id) + ", entity is " +
               std::to_string(entity.id));

  // (1) every SF on exactly one known CN
  bool placement_ok = x.size() == entity.sfs.size();
  if (!placement_ok) {
    add(1, "assignment size " + std::to_string(x.size()) + " != SF count " + std::to_string(entity.sfs.size()));
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) {
      NodeId m = x.placement[i];
      if (m == kUnplaced || m < 0 || m >= n_nodes) {
        add(1, "SF " + std::to_string(entity.sfs[i].id) + " is not placed on a known CN");
        placement_ok = false;
      }
    }
  }

  // (3) node capacity
  if (placement_ok) {
    std::map<NodeId, Units> load;
    for (std::size_t i = 0; i < x.size(); ++i) load[x.placement[i]] += entity.sfs[i].cpu_demand;
    for (const auto& [m, used] : load)
      if (used > topology.node(m).cpu_available)
        add(3, "CN " + std::to_string(m) + " load " + std::to_string(used) + " exceeds available " +
                   std::to_string(topology.node(m).cpu_available));
  }

  // (4) one well-formed tunnel per Cut-LL; (5) tunnel endpoints match placement
  std::map<LinkId, Units> link_load;
  for (const auto& [ll_idx, path] : decision.flows) {
    const std::string tag = "flow for LL " + std::to_string(ll_idx);
    if (ll_idx < 0 || static_cast<std::size_t>(ll_idx) >= entity.lls.size()) {
      add(4, tag + " references an unknown LL");
      continue;
    }
    bool well_formed = path.nodes.size() >= 2 && path.links.size() + 1 == path.nodes.size();
    if (well_formed) {
      std::set<NodeId> visited;
      for (std::size_t i = 0; i < path.nodes.size() && well_formed; ++i) {
        NodeId node = path.nodes[i];
        if (node < 0 || node >= n_nodes || !visited.insert(node).second) well_formed = false;
      }
      for (std::size_t i = 0; i < path.links.size() && well_formed; ++i) {
        auto l = topology.find_link(path.nodes[i], path.nodes[i + 1]);
        if (!l || *l != path.links[i]) well_formed = false;
      }
    }
    if (!well_formed) {
      add(4, tag + " is not a loop-free path of the topology");
      continue;
    }
    const auto& ll = entity.lls[static_cast<std::size_t>(ll_idx)];
    if (placement_ok) {
      NodeId a = x[ll.u];
      NodeId b = x[ll.v];
      if (a == b) {
        add(5, tag + " is routed externally but its endpoint SFs are co-located");
      } else if (!((path.source() == a && path.target() == b) || (path.source() == b && path.target() == a))) {
        add(5, tag + " does not join the CNs hosting its endpoint SFs");
      }
    }
    for (LinkId l : path.links) link_load[l] += ll.bw_demand;
  }
  if (placement_ok) {
    for (std::size_t i = 0; i < entity.lls.size(); ++i) {
      const auto& ll = entity.lls[i];
      if (x[ll.u] != x[ll.v] && !decision.flows.contains(static_cast<LlIndex>(i)))
        add(4, "Cut-LL " + std::to_string(i) + " has no tunnel");
    }
  }

  // (6) link capacity
  for (const auto& [l, used] : link_load) {
    const CpnLink& link = topology.link(l);
    if (used > link.bw_available)
      add(6, "NL " + std::to_string(link.u) + "-" + std::to_string(link.v) + " load " + std::to_string(used) +
                 " exceeds available " + std::to_string(link.bw_available));
  }
  return report;
}

ResourceLedger::ResourceLedger(CpnTopology topology) : topology_(std::move(topology)) {}

ValidationReport ResourceLedger::allocate(const ServiceEntity& entity, const MappingDecision& decision) {
  if (residents_.contains(entity.id))
    throw ContractError("request " + std::to_string(entity.id) + " is already resident");
  ValidationReport report = validate_decision(topology_, entity, decision);
  if (!report.ok()) return report;

  Resident r{decision, {}, {}};
  for (std::size_t i = 0; i < entity.sfs.size(); ++i) r.cpu[decision.assignment.placement[i]] += entity.sfs[i].cpu_demand;
  for (const auto& [ll, path] : decision.flows)
    for (LinkId l : path.links) r.bw[l] += entity.lls[static_cast<std::size_t>(ll)].bw_demand;
  for (const auto& [m, amount] : r.cpu) topology_.debit_cpu(m, amount);
  for (const auto& [l, amount] : r.bw) topology_.debit_bw(l, amount);
  residents_.emplace(entity.id, std::move(r));
  return report;
}

void ResourceLedger::release(const ServiceEntity& entity, const MappingDecision& decision) {
  auto it = residents_.find(entity.id);
  if (it == residents_.end())
    throw ContractError("release of request " + std::to_string(entity.id) + " which is not resident");
  if (!(it->second.decision == decision))
    throw ContractError("release of request " + std::to_string(entity.id) + " with a different decision");
  release(entity.id);
}

void ResourceLedger::release(RequestId id) {
  auto it = residents_.find(id);
  if (it == residents_.end()) throw ContractError("release of request " + std::to_string(id) + " which is not resident");
  for (const auto& [m, amount] : it->second.cpu) topology_.credit_cpu(m, amount);
  for (const auto& [l, amount] : it->second.bw) topology_.credit_bw(l, amount);
  residents_.erase(it);
}

Units ResourceLedger::resident_cpu() const {
  Units total = 0;
  for (const auto& [id, r] : residents_)
    for (const auto& [m, amount] : r.cpu) total += amount;
  return total;
}

Units ResourceLedger::resident_bw() const {
  Units total = 0;
  for (const auto& [id, r] : residents_)
    for (const auto& [l, amount] : r.bw) total += amount;
  return total;
}

Units ResourceLedger::debited_cpu() const { return topology_.total_cpu_capacity() - topology_.total_cpu_available(); }

Units ResourceLedger::debited_bw() const { return topology_.total_bw_capacity() - topology_.total_bw_available(); }

bool ResourceLedger::conservation_holds() const {
  std::vector<Units> cpu(topology_.node_count(), 0);
  std::vector<Units> bw(topology_.link_count(), 0);
  for (const auto& [id, r] : residents_) {
    for (const auto& [m, amount] : r.cpu) cpu[static_cast<std::size_t>(m)] += amount;
    for (const auto& [l, amount] : r.bw) bw[static_cast<std::size_t>(l)] += amount;
  }
  for (const auto& node : topology_.nodes())
    if (node.cpu_capacity - node.cpu_available != cpu[static_cast<std::size_t>(node.id)]) return false;
  for (std::size_t l = 0; l < topology_.link_count(); ++l) {
    const auto& link = topology_.link(static_cast<LinkId>(l));
    if (link.bw_capacity - link.bw_available != bw[l]) return false;
  }
  return true;
}

double cu_ratio(const CpnTopology& topology) {
  const Units cap = topology.total_cpu_capacity();
  if (cap == 0) return 0.0;
  return static_cast<double>(cap - topology.total_cpu_available()) / static_cast<double>(cap);
}

}  // namespace sem
