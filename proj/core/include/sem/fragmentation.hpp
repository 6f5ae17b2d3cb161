#pragma once

// Fragmentation-aware scoring of a candidate mapping decision.
//
//   NRED  rewards exhausting the CNs a decision touches,
//   CBUG  rewards CPU used per unit of correlated bandwidth consumed,
//   PNVL  penalises tunnels that forward through CNs with spare CPU.
//
// Larger metric values are better; the scalar fitness is the reciprocal of
// their weighted sum, so lower fitness is better.

#include <array>
#include <map>

#include "sem/model.hpp"

namespace sem {

enum class PnvlExponentSign {
  kAsWritten,  // per-Cut-LL sum divided by e^{-|MoP|}
  kCorrected,  // per-Cut-LL sum divided by e^{+|MoP|}
};

struct FragConfig {
  double delta = 0.05;
  double eps = 1e-6;
  double eps_prime = 1e-3;
  std::array<double, 3> weights{0.6, 0.3, 0.1};
  PnvlExponentSign pnvl_exponent_sign = PnvlExponentSign::kAsWritten;

  void validate() const;
};

struct FragScores {
  double nred = 0.0;
  double cbug = 0.0;
  double pnvl = 0.0;
  double fitness = 0.0;
};

struct NodeUsage {
  std::map<NodeId, Units> cpu;        // P_C over participating CNs
  std::map<NodeId, Units> bandwidth;  // P_BW over participating CNs
};

NodeUsage node_usage(const ServiceEntity& entity, const MappingDecision& decision);

/// `topology` supplies C(m), the availability at decision time.
double nred(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
            const FragConfig& config);
double cbug(const ServiceEntity& entity, const MappingDecision& decision, const FragConfig& config);
double pnvl(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
            const FragConfig& config);

/// 1 / (w1 NRED + w2 CBUG + w3 PNVL). Throws ContractError if the weighted
/// sum is not positive.
double fitness_from_metrics(double nred_value, double cbug_value, double pnvl_value, const FragConfig& config);

FragScores score(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
                 const FragConfig& config);

inline double fitness(const ServiceEntity& entity, const MappingDecision& decision, const CpnTopology& topology,
                      const FragConfig& config) {
  return score(entity, decision, topology, config).fitness;
}

}  // namespace sem
