#include "sem/config.hpp"

#include <filesystem>
#include <set>

#include "sem/io.hpp"

namespace sem {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ModelError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) throw ModelError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void take(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ModelError("config key '" + (where.empty() ? std::string(key) : where + "." + key) + "' has the wrong type");
  }
}

void take_range(const json& j, const char* key, const std::string& where, UnitRange& out) {
  if (!j.contains(key)) return;
  const json& r = j.at(key);
  const std::string name = where + "." + key;
  if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
    throw ModelError("config key '" + name + "' must be [lo, hi] integers");
  out = {r[0].get<Units>(), r[1].get<Units>()};
}

json range_json(UnitRange r) { return json::array({r.lo, r.hi}); }

}  // namespace

void RunConfig::validate() const {
  if (solver != "abs" && solver != "rwbfs") throw ModelError("solver must be 'abs' or 'rwbfs'");
  if (init != "default" && init != "rwbfs") throw ModelError("init must be 'default' or 'rwbfs'");
  if (topology.kind != "random" && topology.kind != "file" && topology.kind != "edge_list")
    throw ModelError("topology.kind must be random, file or edge_list");
  if (workload.kind != "random" && workload.kind != "file") throw ModelError("workload.kind must be random or file");
  if ((topology.kind != "random" && topology.path.empty()) || (workload.kind == "file" && workload.path.empty()))
    throw ModelError("file sources need a path");
  for (UnitRange r : {topology.cpu, topology.bw, workload.entity.size, workload.entity.demand})
    if (r.lo < 1 || r.hi < r.lo) throw ModelError("ranges must satisfy 1 <= lo <= hi");
  if (!(workload.entity.density >= 0.0 && workload.entity.density <= 1.0))
    throw ModelError("workload.density must lie in [0, 1]");
  if (!(workload.arrival_rate > 0.0) || !(workload.mean_lifetime > 0.0))
    throw ModelError("workload rates must be positive");
  if (k_paths < 1) throw ModelError("routing.k_paths must be >= 1");
  if (!(rw_damping >= 0.0 && rw_damping <= 1.0)) throw ModelError("baseline.damping must lie in [0, 1]");
  if (partition.trials < 1 || partition.refinement_passes < 0 || partition.relax_step < 0.0 ||
      partition.relax_limit < 0.0)
    throw ModelError("partition options out of range");
  frag.validate();
  profit.validate();
  SearchParams s = search;
  s.balance_tolerance = balance_tolerance;
  s.k_paths = k_paths;
  s.validate();
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  only_keys(j, "", {"seed", "solver", "init", "topology", "workload", "frag", "search", "profit", "routing",
                    "partition", "baseline"});
  take(j, "seed", "", c.seed);
  take(j, "solver", "", c.solver);
  take(j, "init", "", c.init);
  if (j.contains("topology")) {
    const json& t = j["topology"];
    only_keys(t, "topology", {"kind", "path", "nodes", "links", "cpu", "bw", "seed"});
    take(t, "kind", "topology", c.topology.kind);
    take(t, "path", "topology", c.topology.path);
    take(t, "nodes", "topology", c.topology.nodes);
    take(t, "links", "topology", c.topology.links);
    take_range(t, "cpu", "topology", c.topology.cpu);
    take_range(t, "bw", "topology", c.topology.bw);
    take(t, "seed", "topology", c.topology.seed);
  }
  if (j.contains("workload")) {
    const json& w = j["workload"];
    only_keys(w, "workload",
              {"kind", "path", "requests", "arrival_rate", "mean_lifetime", "size", "density", "demand", "seed"});
    take(w, "kind", "workload", c.workload.kind);
    take(w, "path", "workload", c.workload.path);
    take(w, "requests", "workload", c.workload.requests);
    take(w, "arrival_rate", "workload", c.workload.arrival_rate);
    take(w, "mean_lifetime", "workload", c.workload.mean_lifetime);
    take_range(w, "size", "workload", c.workload.entity.size);
    take(w, "density", "workload", c.workload.entity.density);
    take_range(w, "demand", "workload", c.workload.entity.demand);
    take(w, "seed", "workload", c.workload.seed);
  }
  if (j.contains("frag")) {
    const json& f = j["frag"];
    only_keys(f, "frag", {"delta", "eps", "eps_prime", "weights", "pnvl_exponent_sign"});
    take(f, "delta", "frag", c.frag.delta);
    take(f, "eps", "frag", c.frag.eps);
    take(f, "eps_prime", "frag", c.frag.eps_prime);
    take(f, "weights", "frag", c.frag.weights);
    std::string sign = "as_written";
    take(f, "pnvl_exponent_sign", "frag", sign);
    if (sign == "as_written")
      c.frag.pnvl_exponent_sign = PnvlExponentSign::kAsWritten;
    else if (sign == "corrected")
      c.frag.pnvl_exponent_sign = PnvlExponentSign::kCorrected;
    else
      throw ModelError("frag.pnvl_exponent_sign must be 'as_written' or 'corrected'");
  }
  if (j.contains("search")) {
    const json& s = j["search"];
    only_keys(s, "search", {"n_workers", "swarm_size", "max_iters", "elite_size", "local_archive_cap", "archive_cap",
                            "deterministic", "archive_protect_best", "velocity_clamp"});
    take(s, "n_workers", "search", c.search.n_workers);
    take(s, "swarm_size", "search", c.search.swarm_size);
    take(s, "max_iters", "search", c.search.max_iters);
    take(s, "elite_size", "search", c.search.elite_size);
    take(s, "local_archive_cap", "search", c.search.local_archive_cap);
    take(s, "archive_cap", "search", c.search.archive_cap);
    take(s, "deterministic", "search", c.search.deterministic);
    take(s, "archive_protect_best", "search", c.search.archive_protect_best);
    take(s, "velocity_clamp", "search", c.search.velocity_clamp);
  }
  if (j.contains("profit")) {
    const json& p = j["profit"];
    only_keys(p, "profit", {"profit_exponent", "cost_weight"});
    take(p, "profit_exponent", "profit", c.profit.profit_exponent);
    take(p, "cost_weight", "profit", c.profit.cost_weight);
  }
  if (j.contains("routing")) {
    only_keys(j["routing"], "routing", {"k_paths"});
    take(j["routing"], "k_paths", "routing", c.k_paths);
  }
  if (j.contains("partition")) {
    const json& p = j["partition"];
    only_keys(p, "partition",
              {"balance_tolerance", "trials", "refinement_passes", "relax_step", "relax_limit", "coarsen_floor",
               "balance_search_budget"});
    take(p, "balance_tolerance", "partition", c.balance_tolerance);
    take(p, "trials", "partition", c.partition.trials);
    take(p, "refinement_passes", "partition", c.partition.refinement_passes);
    take(p, "relax_step", "partition", c.partition.relax_step);
    take(p, "relax_limit", "partition", c.partition.relax_limit);
    take(p, "balance_search_budget", "partition", c.partition.balance_search_budget);
    take(p, "coarsen_floor", "partition", c.partition.coarsen_floor);
  }
  if (j.contains("baseline")) {
    only_keys(j["baseline"], "baseline", {"damping", "iters"});
    take(j["baseline"], "damping", "baseline", c.rw_damping);
    take(j["baseline"], "iters", "baseline", c.rw_iters);
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["solver"] = c.solver;
  j["init"] = c.init;
  json t{{"kind", c.topology.kind}};
  if (c.topology.kind == "random") {
    t["nodes"] = c.topology.nodes;
    t["links"] = c.topology.links;
  } else {
    t["path"] = c.topology.path;
  }
  if (c.topology.kind != "file") {
    t["cpu"] = range_json(c.topology.cpu);
    t["bw"] = range_json(c.topology.bw);
    t["seed"] = c.topology.seed;
  }
  j["topology"] = t;
  json w{{"kind", c.workload.kind}};
  if (c.workload.kind == "random") {
    w["requests"] = c.workload.requests;
    w["arrival_rate"] = c.workload.arrival_rate;
    w["mean_lifetime"] = c.workload.mean_lifetime;
    w["size"] = range_json(c.workload.entity.size);
    w["density"] = c.workload.entity.density;
    w["demand"] = range_json(c.workload.entity.demand);
    w["seed"] = c.workload.seed;
  } else {
    w["path"] = c.workload.path;
  }
  j["workload"] = w;
  j["frag"] = {{"delta", c.frag.delta},
               {"eps", c.frag.eps},
               {"eps_prime", c.frag.eps_prime},
               {"weights", c.frag.weights},
               {"pnvl_exponent_sign",
                c.frag.pnvl_exponent_sign == PnvlExponentSign::kAsWritten ? "as_written" : "corrected"}};
  j["search"] = {{"n_workers", c.search.n_workers},
                 {"swarm_size", c.search.swarm_size},
                 {"max_iters", c.search.max_iters},
                 {"elite_size", c.search.elite_size},
                 {"local_archive_cap", c.search.local_archive_cap},
                 {"archive_cap", c.search.archive_cap},
                 {"deterministic", c.search.deterministic},
                 {"archive_protect_best", c.search.archive_protect_best},
                 {"velocity_clamp", c.search.velocity_clamp}};
  j["profit"] = {{"profit_exponent", c.profit.profit_exponent}, {"cost_weight", c.profit.cost_weight}};
  j["routing"] = {{"k_paths", c.k_paths}};
  j["partition"] = {{"balance_tolerance", c.balance_tolerance},
                    {"trials", c.partition.trials},
                    {"refinement_passes", c.partition.refinement_passes},
                    {"relax_step", c.partition.relax_step},
                    {"relax_limit", c.partition.relax_limit},
                    {"coarsen_floor", c.partition.coarsen_floor},
                    {"balance_search_budget", c.partition.balance_search_budget}};
  j["baseline"] = {{"damping", c.rw_damping}, {"iters", c.rw_iters}};
  return j;
}

Scenario build_scenario(const RunConfig& c, const std::string& base_dir) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path.string() : (std::filesystem::path(base_dir) / path).string();
  };
  Scenario s;
  if (c.topology.kind == "random")
    s.topology = generate_random_cpn(c.topology.nodes, c.topology.links, c.topology.cpu, c.topology.bw, c.topology.seed);
  else if (c.topology.kind == "file")
    s.topology = load_cpn_edge_list(read_file(resolve(c.topology.path)));
  else
    s.topology = import_edge_list(read_file(resolve(c.topology.path)), c.topology.cpu, c.topology.bw, c.topology.seed);

  if (c.workload.kind == "random")
    s.workload = generate_workload(c.workload.requests, c.workload.arrival_rate, c.workload.mean_lifetime,
                                   c.workload.entity, c.workload.seed);
  else
    s.workload = load_workload(read_file(resolve(c.workload.path)));
  s.profit = c.profit;
  s.frag = c.frag;
  s.k_paths = c.k_paths;
  return s;
}

Solver build_solver(const RunConfig& c) {
  if (c.solver == "rwbfs") return make_rwbfs_solver(c.rw_damping, c.rw_iters);
  AbsSolverConfig a;
  a.frag = c.frag;
  a.search = c.search;
  a.search.seed = c.seed;
  a.search.k_paths = c.k_paths;
  a.search.balance_tolerance = c.balance_tolerance;
  a.partition = c.partition;
  a.init = c.init == "rwbfs" ? InitMode::kRwBfs : InitMode::kDefault;
  a.rw_damping = c.rw_damping;
  a.rw_iters = c.rw_iters;
  return make_abs_solver(a);
}

}  // namespace sem
