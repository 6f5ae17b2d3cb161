#include "commands.hpp"

#include <filesystem>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plot.hpp"
#include "sem/config.hpp"
#include "sem/io.hpp"
#include "sem/oracle.hpp"
#include "sem/simulator.hpp"

namespace sem::cli {

namespace fs = std::filesystem;

namespace {

struct TopologyArgs {
  std::size_t nodes = 100;
  std::size_t links = 500;
  Units cpu_min = 400, cpu_max = 600, bw_min = 400, bw_max = 600;
  std::uint64_t seed = 1;
  std::string from_edge_list;
  std::string out;
};

struct WorkloadArgs {
  std::size_t requests = 2000;
  double rate = 0.1;
  double lifetime = 500.0;
  std::size_t size_min = 50, size_max = 100;
  double density = 0.9;
  Units demand_min = 1, demand_max = 20;
  std::uint64_t seed = 1;
  std::string out;
};

struct RunArgs {
  std::string config;
  std::string solver;
  std::string init;
  bool deterministic = false;
  bool trace = false;
  std::string out;
};

int cmd_generate_topology(const TopologyArgs& a, std::ostream& out) {
  const UnitRange cpu{a.cpu_min, a.cpu_max};
  const UnitRange bw{a.bw_min, a.bw_max};
  CpnTopology g = a.from_edge_list.empty() ? generate_random_cpn(a.nodes, a.links, cpu, bw, a.seed)
                                           : import_edge_list(read_file(a.from_edge_list), cpu, bw, a.seed);
  write_file(a.out, write_cpn_edge_list(g));
  out << "wrote " << a.out << " (" << g.node_count() << " nodes, " << g.link_count() << " links)\n";
  return kExitOk;
}

int cmd_generate_workload(const WorkloadArgs& a, std::ostream& out) {
  EntityParams ep;
  ep.size = {static_cast<Units>(a.size_min), static_cast<Units>(a.size_max)};
  ep.density = a.density;
  ep.demand = {a.demand_min, a.demand_max};
  auto w = generate_workload(a.requests, a.rate, a.lifetime, ep, a.seed);
  write_file(a.out, write_workload(w));
  out << "wrote " << a.out << " (" << w.size() << " requests)\n";
  return kExitOk;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const nlohmann::json raw = [&] {
    try {
      return nlohmann::json::parse(read_file(a.config));
    } catch (const nlohmann::json::exception& ex) {
      throw ModelError(std::string("config is not valid JSON: ") + ex.what());
    }
  }();
  RunConfig config = config_from_json(raw);
  if (!a.solver.empty()) config.solver = a.solver;
  if (!a.init.empty()) config.init = a.init;
  if (a.deterministic) config.search.deterministic = true;
  config.validate();

  const std::string base = fs::path(a.config).parent_path().string();
  const Scenario scenario = build_scenario(config, base);
  const SimResult result = run(scenario, build_solver(config));

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  const nlohmann::json echo = config_to_json(config);
  write_file((dir / "config.json").string(), echo.dump(2) + "\n");
  write_file((dir / "topology.txt").string(), write_cpn_edge_list(scenario.topology));
  write_file((dir / "workload.jsonl").string(), write_workload(scenario.workload));
  write_file((dir / "requests.csv").string(), requests_csv(result));
  write_file((dir / "events.jsonl").string(), events_jsonl(result));
  write_file((dir / "decisions.jsonl").string(), decisions_jsonl(result));
  const nlohmann::json summary = summary_json(result, echo);
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  if (a.trace) write_file((dir / "trace.jsonl").string(), search_trace_jsonl(result));

  out << config.solver << (config.solver == "abs" && config.init == "rwbfs" ? " (init rwbfs)" : "") << ": accepted "
      << summary["accepted"] << "/" << summary["requests"] << ", acceptance " << summary["acceptance_ratio"]
      << ", cu_ratio " << summary["cu_ratio"] << ", profit " << summary["profit"] << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& trace_dir, std::ostream& out, std::ostream& err) {
  const fs::path dir(trace_dir);
  const CpnTopology topology = load_cpn_edge_list(read_file((dir / "topology.txt").string()));
  const auto workload = load_workload(read_file((dir / "workload.jsonl").string()));
  const std::string events = read_file((dir / "events.jsonl").string());
  const std::string decisions = read_file((dir / "decisions.jsonl").string());
  ReplayReport report;
  try {
    report = replay_trace(topology, workload, events, decisions);
  } catch (const ParseError& ex) {
    err << "malformed trace: " << ex.what() << "\n";
    return kExitValidation;
  }
  for (const auto& p : report.problems) err << p << "\n";
  if (!report.ok()) {
    err << report.problems.size() << " violation(s)\n";
    return kExitValidation;
  }
  out << "ok: " << report.accepted_checked << " accepted decision(s) replayed\n";
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out_path, std::ostream& out,
             std::ostream& err) {
  const std::vector<std::pair<std::string, std::string>> metrics{{"cum_acceptance", "Acceptance ratio"},
                                                                 {"lt_ar", "Long-term average revenue"},
                                                                 {"lt_rc_ratio", "Long-term revenue to cost ratio"},
                                                                 {"profit", "Profit"},
                                                                 {"cu_ratio", "CU-Ratio"}};
  std::vector<Chart> charts;
  for (const auto& [col, title] : metrics) charts.push_back({title, {}});
  for (const auto& in : inputs) {
    Table t;
    try {
      t = parse_csv(read_file(in));
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ModelError(in + ": " + ex.what());
    }
    if (t.rows.empty()) {
      err << "warning: " << in << " has no data rows\n";
      continue;
    }
    const int tcol = t.column("t");
    if (tcol < 0) throw ModelError(in + ": missing column 't'");
    std::string label = fs::path(in).parent_path().filename().string();
    if (label.empty()) label = fs::path(in).stem().string();
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const int c = t.column(metrics[m].first);
      if (c < 0) throw ModelError(in + ": missing column '" + metrics[m].first + "'");
      Series s{label, {}, {}};
      for (const auto& row : t.rows) {
        s.x.push_back(row[static_cast<std::size_t>(tcol)]);
        s.y.push_back(row[static_cast<std::size_t>(c)]);
      }
      charts[m].series.push_back(std::move(s));
    }
  }
  write_file(out_path, render_svg(charts));
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_oracle(std::size_t sweep, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const nlohmann::json report = oracle_sweep(sweep, seed);
  if (out_path.empty())
    out << report.dump(2) << "\n";
  else
    write_file(out_path, report.dump(2) + "\n");
  return report["all_passed"].get<bool>() ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Service entity mapping: generators, simulator, validators and oracles", "sem"};
  app.require_subcommand(1);

  TopologyArgs topo;
  WorkloadArgs work;
  auto* generate = app.add_subcommand("generate", "Generate a topology or workload file");
  generate->require_subcommand(1);
  auto* gen_topo = generate->add_subcommand("topology", "Random Waxman topology or imported edge list");
  gen_topo->add_option("--nodes", topo.nodes, "Node count")->capture_default_str();
  gen_topo->add_option("--links", topo.links, "Link count")->capture_default_str();
  gen_topo->add_option("--cpu-min", topo.cpu_min)->capture_default_str();
  gen_topo->add_option("--cpu-max", topo.cpu_max)->capture_default_str();
  gen_topo->add_option("--bw-min", topo.bw_min)->capture_default_str();
  gen_topo->add_option("--bw-max", topo.bw_max)->capture_default_str();
  gen_topo->add_option("--seed", topo.seed)->capture_default_str();
  gen_topo->add_option("--from-edge-list", topo.from_edge_list, "Import a raw 'a b [w]' edge list instead");
  gen_topo->add_option("--out", topo.out, "Output path")->required();

  auto* gen_work = generate->add_subcommand("workload", "Poisson-arrival workload of random service entities");
  gen_work->add_option("--requests", work.requests)->capture_default_str();
  gen_work->add_option("--rate", work.rate, "Arrival rate")->capture_default_str();
  gen_work->add_option("--lifetime", work.lifetime, "Mean lifetime")->capture_default_str();
  gen_work->add_option("--size-min", work.size_min)->capture_default_str();
  gen_work->add_option("--size-max", work.size_max)->capture_default_str();
  gen_work->add_option("--density", work.density)->capture_default_str();
  gen_work->add_option("--demand-min", work.demand_min)->capture_default_str();
  gen_work->add_option("--demand-max", work.demand_max)->capture_default_str();
  gen_work->add_option("--seed", work.seed)->capture_default_str();
  gen_work->add_option("--out", work.out, "Output path")->required();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run an online simulation");
  run_cmd->add_option("--config", run_args.config, "JSON run configuration")->required();
  run_cmd->add_option("--solver", run_args.solver, "Override the configured solver")
      ->check(CLI::IsMember({"abs", "rwbfs"}));
  run_cmd->add_option("--init", run_args.init, "Override the ABS initializer")
      ->check(CLI::IsMember({"default", "rwbfs"}));
  run_cmd->add_flag("--deterministic", run_args.deterministic, "Round-robin worker stepping");
  run_cmd->add_flag("--trace", run_args.trace, "Also write per-iteration search records");
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();

  std::string trace_dir;
  auto* validate = app.add_subcommand("validate", "Replay and re-validate a run directory");
  validate->add_option("--trace", trace_dir, "Run output directory")->required();

  std::vector<std::string> plot_in;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Plot metric time series from requests.csv files");
  plot->add_option("--in", plot_in, "Per-request CSV files")->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();

  std::size_t sweep = 50;
  std::uint64_t oracle_seed = 1;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "Brute-force equivalence checks on tiny instances");
  oracle->add_option("--sweep", sweep, "Instances per check")->capture_default_str();
  oracle->add_option("--seed", oracle_seed)->capture_default_str();
  oracle->add_option("--out", oracle_out, "Write the JSON report here instead of stdout");

  std::vector<const char*> argv{"sem"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << ex.what() << "\nrun 'sem --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (gen_topo->parsed()) return cmd_generate_topology(topo, out);
    if (gen_work->parsed()) return cmd_generate_workload(work, out);
    if (run_cmd->parsed()) return cmd_run(run_args, out);
    if (validate->parsed()) return cmd_validate(trace_dir, out, err);
    if (plot->parsed()) return cmd_plot(plot_in, plot_out, out, err);
    if (oracle->parsed()) return cmd_oracle(sweep, oracle_seed, oracle_out, out);
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sem::cli
