#include "sem/fragmentation.hpp"

#include <cmath>

namespace sem {

void FragConfig::validate() const {
  if (!(delta >= 0.0 && delta < 1.0)) throw ModelError("frag.delta must lie in [0, 1)");
  if (!(eps > 0.0) || !(eps_prime > eps)) throw ModelError("frag.eps must be positive and smaller than frag.eps_prime");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ModelError("frag.weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ModelError("frag.weights must sum to 1");
}

NodeUsage node_usage(const ServiceEntity& entity, const MappingDecision& decision) {
  NodeUsage u;
  const Assignment& x = decision.assignment;
  for (std::size_t i = 0; i < entity.sfs.size(); ++i) {
    u.cpu[x.placement.at(i)] += entity.sfs[i].cpu_demand;
    u.bandwidth.try_emplace(x.placement[i], 0);
  }
  for (const auto& ll : entity.lls) {
    NodeId a = x[ll.u];
    NodeId b = x[ll.v];
    if (a == b) continue;
    u.bandwidth[a] += ll.bw_demand;
    u.bandwidth[b] += ll.bw_demand;
  }
  return u;
}

double nred(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
            const FragConfig& config) {
  const NodeUsage u = node_usage(entity, decision);
  double utilisation = 0.0;
  double penalties = 0.0;
  for (const auto& [m, used] : u.cpu) {
    const double ratio = static_cast<double>(used) / static_cast<double>(topology.node(m).cpu_available);
    utilisation += ratio;
    penalties += std::ceil(std::max(1.0 - ratio - config.delta, 0.0));
  }
  return utilisation / (penalties + config.eps);
}

double cbug(const ServiceEntity& entity, const MappingDecision& decision, const FragConfig& config) {
  const NodeUsage u = node_usage(entity, decision);
  double sum = 0.0;
  for (const auto& [m, used] : u.cpu)
    sum += static_cast<double>(used) / (static_cast<double>(u.bandwidth.at(m)) + config.eps);
  return sum / static_cast<double>(u.cpu.size());
}

double pnvl(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
            const FragConfig& config) {
  const NodeUsage u = node_usage(entity, decision);
  const double sign = config.pnvl_exponent_sign == PnvlExponentSign::kAsWritten ? 1.0 : -1.0;
  double total = 0.0;
  for (const auto& [ll_idx, path] : decision.flows) {
    const double bw = static_cast<double>(entity.lls.at(static_cast<std::size_t>(ll_idx)).bw_demand);
    double sum = 0.0;
    std::size_t forwarding = 0;
    for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
      const NodeId m = path.nodes[i];
      auto it = u.cpu.find(m);
      const double hosted = it == u.cpu.end() ? 0.0 : static_cast<double>(it->second);
      sum += bw / (static_cast<double>(topology.node(m).cpu_available) - hosted + config.eps);
      ++forwarding;
    }
    total += sum * std::exp(sign * static_cast<double>(forwarding));
  }
  return (total + config.eps_prime) / (static_cast<double>(decision.flows.size()) + config.eps);
}

double fitness_from_metrics(double nred_value, double cbug_value, double pnvl_value, const FragConfig& config) {
  const double weighted =
      config.weights[0] * nred_value + config.weights[1] * cbug_value + config.weights[2] * pnvl_value;
  if (!(weighted > 0.0)) throw ContractError("fitness undefined: weighted metric sum is not positive");
  return 1.0 / weighted;
}

FragScores score(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
                 const FragConfig& config) {
  FragScores s;
  s.nred = nred(entity, decision, topology, config);
  s.cbug = cbug(entity, decision, config);
  s.pnvl = pnvl(entity, decision, topology, config);
  s.fitness = fitness_from_metrics(s.nred, s.cbug, s.pnvl, config);
  return s;
}

}  // namespace sem
