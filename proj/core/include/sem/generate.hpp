#pragma once

// Random substrate and request generators.

#include <cstdint>

#include "sem/model.hpp"

namespace sem {

struct UnitRange {
  Units lo = 1;
  Units hi = 1;
};

struct WaxmanParams {
  double alpha = 0.5;
  double beta = 0.2;
};

/// Connected random topology with exactly n_nodes and n_links. Edge
/// likelihoods follow the Waxman model on unit-square coordinates; edges are
/// then added or removed to hit the exact link count without disconnecting.
CpnTopology generate_random_cpn(std::size_t n_nodes, std::size_t n_links, UnitRange cpu, UnitRange bw,
                                std::uint64_t seed, WaxmanParams waxman = {});

struct EntityParams {
  UnitRange size{50, 100};
  double density = 0.9;
  UnitRange demand{1, 20};
};

/// Uniform random spanning tree plus each remaining SF pair joined with
/// probability `density`. CPU and bandwidth demands are uniform in `demand`.
ServiceEntity generate_service_entity(const EntityParams& params, std::uint64_t seed, RequestId id = 0);

}  // namespace sem
