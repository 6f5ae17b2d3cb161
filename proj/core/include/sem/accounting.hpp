#pragma once

// Revenue/cost/profit, constraint validation, and the resource ledger that
// debits and credits substrate availability.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sem/model.hpp"

namespace sem {

/// LLs whose endpoint SFs sit on different CNs, ascending by index.
/// Throws ContractError if an endpoint SF is unplaced or the assignment size
/// does not match the entity.
std::vector<LlIndex> cut_links(const ServiceEntity& entity, const Assignment& assignment);

/// Sum of Cut-LL bandwidth demands (the partitioning objective).
Units cut_bandwidth(const ServiceEntity& entity, const Assignment& assignment);

Units revenue(const ServiceEntity& entity);

/// Node cost (all SF demands) plus hop count times bandwidth for every flow.
Units cost(const ServiceEntity& entity, const MappingDecision& decision);

struct AcceptedRequest {
  const ServiceEntity* entity;
  const MappingDecision* decision;
};

/// (accepted / arrived)^exponent * (sum revenue - weight * sum cost); 0 when
/// nothing has arrived.
double profit(std::span<const AcceptedRequest> accepted, std::size_t arrived_count, const ProfitParams& params);

/// Closed-form profit for already-aggregated totals.
double profit_from_totals(std::size_t accepted, std::size_t arrived, double revenue_sum, double cost_sum,
                          const ProfitParams& params);

struct Violation {
  int equation;  // constraint number: 1, 3, 4, 5 or 6
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool violates(int equation) const;
  std::string summary() const;
};

/// Checks a decision against every placement and routing constraint using the
/// topology's current availability. Never throws on bad decisions.
ValidationReport validate_decision(const CpnTopology& topology, const ServiceEntity& entity,
                                   const MappingDecision& decision);

/// Owns the live topology and the set of resident requests.
class ResourceLedger {
 public:
  explicit ResourceLedger(CpnTopology topology);

  const CpnTopology& topology() const { return topology_; }

  /// Debits the decision's resources if it validates; otherwise leaves the
  /// topology untouched. Throws ContractError if the request is already resident.
  ValidationReport allocate(const ServiceEntity& entity, const MappingDecision& decision);

  /// Exact inverse of allocate. Throws ContractError if the request is not
  /// resident or the decision differs from the one allocated.
  void release(const ServiceEntity& entity, const MappingDecision& decision);
  void release(RequestId id);

  bool resident(RequestId id) const { return residents_.contains(id); }
  std::size_t resident_count() const { return residents_.size(); }

  Units resident_cpu() const;
  Units resident_bw() const;
  Units debited_cpu() const;
  Units debited_bw() const;

  /// Debited totals on the topology equal the resident demand totals, per node
  /// and per link.
  bool conservation_holds() const;

 private:
  struct Resident {
    MappingDecision decision;
    std::map<NodeId, Units> cpu;
    std::map<LinkId, Units> bw;
  };

  CpnTopology topology_;
  std::map<RequestId, Resident> residents_;
};

/// Per-node CPU utilisation relative to initial capacity.
double cu_ratio(const CpnTopology& topology);

}  // namespace sem
