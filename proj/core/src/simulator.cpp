#include "sem/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include "sem/baseline.hpp"
#include "sem/io.hpp"
#include "sem/log.hpp"

namespace sem {

std::vector<ServiceEntity> generate_workload(std::size_t n_requests, double arrival_rate, double mean_lifetime,
                                             const EntityParams& se, std::uint64_t seed) {
  if (!(arrival_rate > 0.0) || !(mean_lifetime > 0.0))
    throw ModelError("workload arrival rate and mean lifetime must be positive");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(arrival_rate);
  std::exponential_distribution<double> life(1.0 / mean_lifetime);
  std::vector<ServiceEntity> out;
  out.reserve(n_requests);
  SimTime t = 0.0;
  for (std::size_t i = 0; i < n_requests; ++i) {
    t += gap(rng);
    const double lifetime = std::max(life(rng), 1e-9);
    ServiceEntity e = generate_service_entity(se, mix_seed(seed, i + 1), static_cast<RequestId>(i));
    e.arrival_time = t;
    e.lifetime = lifetime;
    out.push_back(std::move(e));
  }
  return out;
}

Solver make_abs_solver(const AbsSolverConfig& config) {
  config.search.validate();
  config.frag.validate();
  return [config](const ServiceEntity& entity, const CpnTopology& topology, const PathTable& table) {
    SearchContext ctx;
    ctx.entity = &entity;
    ctx.topology = &topology;
    ctx.table = &table;
    ctx.frag = config.frag;
    ctx.params = config.search;
    ctx.params.seed = mix_seed(config.search.seed, static_cast<std::uint64_t>(entity.id));
    ctx.partition = config.partition;
    ctx.init = config.init;
    if (config.init == InitMode::kRwBfs)
      ctx.init_decision = rw_bfs_map(entity, topology, rw_rank(topology, config.rw_damping, config.rw_iters), table);
    SolveResult r = controller_solve(ctx);
    return SolverOutcome{std::move(r.decision), std::move(r.trace)};
  };
}

Solver make_rwbfs_solver(double damping, std::size_t iters) {
  return [damping, iters](const ServiceEntity& entity, const CpnTopology& topology, const PathTable& table) {
    return SolverOutcome{rw_bfs_map(entity, topology, rw_rank(topology, damping, iters), table), {}};
  };
}

MetricsSnapshot compute_metrics(const SimState& state, SimTime t, const ProfitParams& profit) {
  MetricsSnapshot s;
  s.t = t;
  s.arrived = state.arrived;
  s.accepted = state.accepted;
  s.acceptance_ratio =
      state.arrived ? static_cast<double>(state.accepted) / static_cast<double>(state.arrived) : 0.0;
  s.cum_revenue = state.cum_revenue;
  s.cum_cost = state.cum_cost;
  s.profit = profit_from_totals(state.accepted, state.arrived, state.cum_revenue, state.cum_cost, profit);
  s.cu_ratio = state.initial_cpu > 0 ? static_cast<double>(state.used_cpu) / static_cast<double>(state.initial_cpu)
                                     : 0.0;
  s.rc_ratio = state.cum_cost > 0.0 ? state.cum_revenue / state.cum_cost : 0.0;
  s.lt_avg_revenue = t > 0.0 ? state.cum_revenue / t : 0.0;
  double num = 0.0;
  double den = 0.0;
  for (const auto& sp : state.spans) {
    const double held = std::max(0.0, std::min(t, sp.departure) - sp.arrival);
    num += sp.revenue * held;
    den += sp.cost * held;
  }
  s.lt_rc_ratio = den > 0.0 ? num / den : 0.0;
  return s;
}

SimResult run(const Scenario& scenario, const Solver& solver) {
  SimResult result;
  ResourceLedger ledger(scenario.topology);
  const PathTable table = precompute_k_paths(scenario.topology, scenario.k_paths);
  const Units initial_cpu = scenario.topology.total_cpu_available();
  const Units initial_bw = scenario.topology.total_bw_available();

  std::map<RequestId, const ServiceEntity*> by_id;
  for (const auto& e : scenario.workload)
    if (!by_id.emplace(e.id, &e).second) throw ModelError("duplicate request id " + std::to_string(e.id));
  std::vector<const ServiceEntity*> arrivals;
  for (const auto& e : scenario.workload) arrivals.push_back(&e);
  std::stable_sort(arrivals.begin(), arrivals.end(), [](const ServiceEntity* a, const ServiceEntity* b) {
    if (a->arrival_time != b->arrival_time) return a->arrival_time < b->arrival_time;
    return a->id < b->id;
  });

  auto later = [](const SimEvent& a, const SimEvent& b) {
    if (a.time != b.time) return a.time > b.time;
    return a.id > b.id;
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, decltype(later)> departures(later);

  SimState state;
  state.initial_cpu = initial_cpu;
  auto note_event = [&](const SimEvent& ev, bool accepted) {
    const CpnTopology& g = ledger.topology();
    result.events.push_back({ev, accepted, initial_cpu - g.total_cpu_available(), initial_bw - g.total_bw_available()});
    if (!ledger.conservation_holds()) {
      result.conservation_ok = false;
      logger().error("conservation broken after event at t={}", ev.time);
    }
  };

  std::size_t next = 0;
  while (next < arrivals.size() || !departures.empty()) {
    const bool depart =
        !departures.empty() && (next == arrivals.size() || departures.top().time <= arrivals[next]->arrival_time);
    if (depart) {
      const SimEvent ev = departures.top();
      departures.pop();
      const ServiceEntity& e = *by_id.at(ev.id);
      ledger.release(ev.id);
      state.used_cpu -= e.total_cpu_demand();
      note_event(ev, false);
      continue;
    }

    const ServiceEntity& e = *arrivals[next++];
    const SimEvent ev{e.arrival_time, EventKind::kArrival, e.id};
    ++state.arrived;
    RequestRecord rec;
    rec.id = e.id;
    rec.t = e.arrival_time;
    rec.revenue = revenue(e);
    try {
      SolverOutcome outcome = solver(e, ledger.topology(), table);
      for (auto& it : outcome.trace) result.search_trace.push_back({e.id, it});
      if (outcome.decision) {
        FragScores scores = score(e, *outcome.decision, ledger.topology(), scenario.frag);
        ValidationReport report = ledger.allocate(e, *outcome.decision);
        if (report.ok()) {
          rec.accepted = true;
          rec.cost = cost(e, *outcome.decision);
          rec.scores = scores;
          rec.decision = std::move(outcome.decision);
        } else {
          rec.error = "allocation refused: " + report.summary();
          logger().error("request {}: {}", e.id, rec.error);
        }
      }
    } catch (const std::exception& ex) {
      rec.error = std::string("solver failure: ") + ex.what();
      logger().error("request {}: {}", e.id, rec.error);
    }
    if (rec.accepted) {
      ++state.accepted;
      state.cum_revenue += static_cast<double>(rec.revenue);
      state.cum_cost += static_cast<double>(rec.cost);
      state.used_cpu += e.total_cpu_demand();
      const SimTime leave = e.arrival_time + e.lifetime;
      state.spans.push_back({e.arrival_time, leave, static_cast<double>(rec.revenue), static_cast<double>(rec.cost)});
      departures.push({leave, EventKind::kDeparture, e.id});
    }
    note_event(ev, rec.accepted);
    result.snapshots.push_back(compute_metrics(state, e.arrival_time, scenario.profit));
    result.requests.push_back(std::move(rec));
  }

  result.final_topology = ledger.topology();
  if (!(result.final_topology == scenario.topology)) {
    result.conservation_ok = false;
    logger().error("final availability differs from the initial topology");
  }
  return result;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string requests_csv(const SimResult& result) {
  std::ostringstream out;
  out << "req_id,t,accepted,revenue,cost,cum_acceptance,lt_ar,profit,cu_ratio,rc_ratio,lt_rc_ratio\n";
  for (std::size_t i = 0; i < result.requests.size(); ++i) {
    const auto& r = result.requests[i];
    const auto& s = result.snapshots[i];
    out << r.id << ',' << num(r.t) << ',' << (r.accepted ? 1 : 0) << ',' << r.revenue << ',' << r.cost << ','
        << num(s.acceptance_ratio) << ',' << num(s.lt_avg_revenue) << ',' << num(s.profit) << ','
        << num(s.cu_ratio) << ',' << num(s.rc_ratio) << ',' << num(s.lt_rc_ratio) << '\n';
  }
  return out.str();
}

nlohmann::json summary_json(const SimResult& result, const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["config"] = config_echo;
  const MetricsSnapshot last = result.snapshots.empty() ? MetricsSnapshot{} : result.snapshots.back();
  double mean_cu = 0.0;
  for (const auto& s : result.snapshots) mean_cu += s.cu_ratio;
  if (!result.snapshots.empty()) mean_cu /= static_cast<double>(result.snapshots.size());
  double mean_nred = 0.0;
  std::size_t scored = 0;
  for (const auto& r : result.requests)
    if (r.scores) {
      mean_nred += r.scores->nred;
      ++scored;
    }
  if (scored) mean_nred /= static_cast<double>(scored);

  j["requests"] = last.arrived;
  j["accepted"] = last.accepted;
  j["last_arrival_time"] = last.t;
  j["acceptance_ratio"] = last.acceptance_ratio;
  j["revenue"] = last.cum_revenue;
  j["cost"] = last.cum_cost;
  j["lt_avg_revenue"] = last.lt_avg_revenue;
  j["profit"] = last.profit;
  j["cu_ratio"] = last.cu_ratio;
  j["mean_cu_ratio"] = mean_cu;
  j["rc_ratio"] = last.rc_ratio;
  j["lt_rc_ratio"] = last.lt_rc_ratio;
  j["mean_nred"] = mean_nred;
  j["conservation_ok"] = result.conservation_ok;
  return j;
}

std::string events_jsonl(const SimResult& result) {
  std::string out;
  for (const auto& e : result.events) {
    nlohmann::json j{{"t", e.event.time},
                     {"kind", e.event.kind == EventKind::kArrival ? "arrival" : "departure"},
                     {"id", e.event.id},
                     {"cpu_used_after", e.cpu_used_after},
                     {"bw_used_after", e.bw_used_after}};
    if (e.event.kind == EventKind::kArrival) j["accepted"] = e.accepted;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string decisions_jsonl(const SimResult& result) {
  std::string out;
  for (const auto& r : result.requests) {
    if (!r.accepted) continue;
    nlohmann::json j{{"id", r.id}, {"t", r.t}, {"revenue", r.revenue}, {"cost", r.cost},
                     {"decision", decision_to_json(*r.decision)}};
    if (r.scores) {
      j["nred"] = r.scores->nred;
      j["cbug"] = r.scores->cbug;
      j["pnvl"] = r.scores->pnvl;
      j["fitness"] = r.scores->fitness;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string search_trace_jsonl(const SimResult& result) {
  std::string out;
  for (const auto& t : result.search_trace) {
    nlohmann::json j{{"request", t.request},
                     {"worker", t.iteration.worker},
                     {"iter", t.iteration.iter},
                     {"best_fitness", nullptr},
                     {"feasible", t.iteration.feasible},
                     {"requested_guidance", t.iteration.requested_guidance}};
    if (t.iteration.best_fitness) j["best_fitness"] = *t.iteration.best_fitness;
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::vector<nlohmann::json> parse_jsonl(std::string_view text, const char* what) {
  std::vector<nlohmann::json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(line_no, std::string(what) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace

ReplayReport replay_trace(const CpnTopology& initial, const std::vector<ServiceEntity>& workload,
                          std::string_view events_text, std::string_view decisions_text) {
  ReplayReport report;
  std::map<RequestId, const ServiceEntity*> entities;
  for (const auto& e : workload) entities.emplace(e.id, &e);

  std::map<RequestId, MappingDecision> decisions;
  std::size_t line_no = 0;
  for (const auto& j : parse_jsonl(decisions_text, "decisions")) {
    ++line_no;
    try {
      const RequestId id = j.at("id").get<RequestId>();
      decisions.emplace(id, decision_from_json(j.at("decision"), initial));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(line_no, std::string("decisions: ") + ex.what());
    }
  }

  ResourceLedger ledger(initial);
  const Units initial_cpu = initial.total_cpu_available();
  const Units initial_bw = initial.total_bw_available();
  line_no = 0;
  for (const auto& j : parse_jsonl(events_text, "events")) {
    ++line_no;
    std::string kind;
    RequestId id = 0;
    bool accepted = false;
    Units cpu_after = 0;
    Units bw_after = 0;
    try {
      kind = j.at("kind").get<std::string>();
      id = j.at("id").get<RequestId>();
      accepted = j.value("accepted", false);
      cpu_after = j.at("cpu_used_after").get<Units>();
      bw_after = j.at("bw_used_after").get<Units>();
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(line_no, std::string("events: ") + ex.what());
    }
    const std::string where = "event " + std::to_string(line_no) + " (request " + std::to_string(id) + "): ";

    if (kind == "arrival") {
      auto d = decisions.find(id);
      if (!accepted) {
        if (d != decisions.end()) report.problems.push_back(where + "rejected request has a recorded decision");
      } else if (!entities.contains(id)) {
        report.problems.push_back(where + "request missing from workload");
      } else if (d == decisions.end()) {
        report.problems.push_back(where + "accepted request has no recorded decision");
      } else if (ledger.resident(id)) {
        report.problems.push_back(where + "request arrives while already resident");
      } else {
        ++report.accepted_checked;
        ValidationReport v = ledger.allocate(*entities.at(id), d->second);
        if (!v.ok()) report.problems.push_back(where + v.summary());
      }
    } else if (kind == "departure") {
      if (!ledger.resident(id))
        report.problems.push_back(where + "conservation: departure of a request that is not resident");
      else
        ledger.release(id);
    } else {
      report.problems.push_back(where + "unknown event kind '" + kind + "'");
    }

    const Units cpu_used = initial_cpu - ledger.topology().total_cpu_available();
    const Units bw_used = initial_bw - ledger.topology().total_bw_available();
    if (cpu_used != cpu_after || bw_used != bw_after)
      report.problems.push_back(where + "conservation: recorded usage (cpu " + std::to_string(cpu_after) + ", bw " +
                                std::to_string(bw_after) + ") differs from replayed usage (cpu " +
                                std::to_string(cpu_used) + ", bw " + std::to_string(bw_used) + ")");
    if (!ledger.conservation_holds()) report.problems.push_back(where + "conservation: ledger mismatch");
  }
  if (ledger.resident_count() != 0)
    report.problems.push_back("conservation: " + std::to_string(ledger.resident_count()) +
                              " request(s) still resident after the final event");
  return report;
}

}  // namespace sem
