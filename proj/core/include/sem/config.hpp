#pragma once

// Run configuration: one JSON document covering the scenario and every
// module's parameters. Unknown keys are rejected.
//
// {
//   "seed": 1,
//   "solver": "abs" | "rwbfs",
//   "init": "default" | "rwbfs",
//   "topology": {"kind": "random", "nodes": 30, "links": 60, "cpu": [100, 150], "bw": [100, 150], "seed": 1}
//             | {"kind": "file", "path": "topo.txt"}
//             | {"kind": "edge_list", "path": "as1239.txt", "cpu": [..], "bw": [..], "seed": 1},
//   "workload": {"kind": "random", "requests": 300, "arrival_rate": 0.1, "mean_lifetime": 500,
//                "size": [5, 15], "density": 0.5, "demand": [1, 20], "seed": 2}
//             | {"kind": "file", "path": "workload.jsonl"},
//   "frag": {"delta", "eps", "eps_prime", "weights": [w1, w2, w3], "pnvl_exponent_sign": "as_written" | "corrected"},
//   "search": {"n_workers", "swarm_size", "max_iters", "elite_size", "local_archive_cap", "archive_cap",
//              "deterministic", "archive_protect_best", "velocity_clamp"},
//   "profit": {"profit_exponent", "cost_weight"},
//   "routing": {"k_paths"},
//   "partition": {"balance_tolerance", "trials", "refinement_passes", "relax_step", "relax_limit", "coarsen_floor",
//                 "balance_search_budget"},
//   "baseline": {"damping", "iters"}
// }
//
// Relative paths resolve against the directory of the config file.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "sem/fragmentation.hpp"
#include "sem/generate.hpp"
#include "sem/partition.hpp"
#include "sem/search.hpp"
#include "sem/simulator.hpp"

namespace sem {

struct TopologySource {
  std::string kind = "random";  // random | file | edge_list
  std::string path;
  std::size_t nodes = 30;
  std::size_t links = 60;
  UnitRange cpu{100, 150};
  UnitRange bw{100, 150};
  std::uint64_t seed = 1;
};

struct WorkloadSource {
  std::string kind = "random";  // random | file
  std::string path;
  std::size_t requests = 300;
  double arrival_rate = 0.1;
  double mean_lifetime = 500.0;
  EntityParams entity{{5, 15}, 0.5, {1, 20}};
  std::uint64_t seed = 2;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string solver = "abs";
  std::string init = "default";
  TopologySource topology;
  WorkloadSource workload;
  FragConfig frag;
  SearchParams search;
  ProfitParams profit;
  std::size_t k_paths = 5;
  PartitionOptions partition;
  double balance_tolerance = 0.05;
  double rw_damping = 0.85;
  std::size_t rw_iters = 50;

  /// Throws ModelError on any invalid value.
  void validate() const;
};

/// Throws ModelError naming the offending key on unknown keys or bad types.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

/// Materialises topology and workload; `base_dir` resolves relative paths.
Scenario build_scenario(const RunConfig& config, const std::string& base_dir);
Solver build_solver(const RunConfig& config);

}  // namespace sem
