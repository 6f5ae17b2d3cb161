#pragma once

// Online discrete-event simulation: requests arrive, a solver maps each one
// against the live topology, accepted requests hold resources until they
// depart. Metrics are sampled after every arrival.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sem/accounting.hpp"
#include "sem/generate.hpp"
#include "sem/model.hpp"
#include "sem/routing.hpp"
#include "sem/search.hpp"

namespace sem {

/// Exponential inter-arrival gaps (rate `arrival_rate`) and lifetimes (mean
/// `mean_lifetime`); ids are 0..n-1 in arrival order.
std::vector<ServiceEntity> generate_workload(std::size_t n_requests, double arrival_rate, double mean_lifetime,
                                             const EntityParams& se, std::uint64_t seed);

struct SolverOutcome {
  std::optional<MappingDecision> decision;
  std::vector<IterationRecord> trace;
};

/// Maps one request against an immutable topology snapshot.
using Solver = std::function<SolverOutcome(const ServiceEntity&, const CpnTopology&, const PathTable&)>;

struct AbsSolverConfig {
  FragConfig frag;
  SearchParams search;
  PartitionOptions partition;
  InitMode init = InitMode::kDefault;
  double rw_damping = 0.85;
  std::size_t rw_iters = 50;
};

/// Per-request seeds are derived from search.seed and the request id.
Solver make_abs_solver(const AbsSolverConfig& config);
Solver make_rwbfs_solver(double damping = 0.85, std::size_t iters = 50);

enum class EventKind { kDeparture, kArrival };  // declaration order is the tie-break order

struct SimEvent {
  SimTime time = 0.0;
  EventKind kind = EventKind::kArrival;
  RequestId id = 0;
};

struct MetricsSnapshot {
  SimTime t = 0.0;
  std::size_t arrived = 0;
  std::size_t accepted = 0;
  double acceptance_ratio = 0.0;
  double cum_revenue = 0.0;
  double cum_cost = 0.0;
  double lt_avg_revenue = 0.0;
  double profit = 0.0;
  double cu_ratio = 0.0;
  double rc_ratio = 0.0;
  double lt_rc_ratio = 0.0;
};

/// Aggregates needed to evaluate the metrics at any time.
struct SimState {
  struct Span {
    SimTime arrival;
    SimTime departure;
    double revenue;
    double cost;
  };

  std::size_t arrived = 0;
  std::size_t accepted = 0;
  double cum_revenue = 0.0;
  double cum_cost = 0.0;
  Units initial_cpu = 0;
  Units used_cpu = 0;
  std::vector<Span> spans;  // one per accepted request
};

/// lt_avg_revenue = cum_revenue / t. lt_rc_ratio weighs each accepted
/// request's revenue and cost by its residence time up to t. Ratios with a
/// zero denominator (including t = 0) are 0.
MetricsSnapshot compute_metrics(const SimState& state, SimTime t, const ProfitParams& profit);

struct Scenario {
  CpnTopology topology;
  std::vector<ServiceEntity> workload;
  ProfitParams profit;
  FragConfig frag;  // scores recorded for accepted decisions
  std::size_t k_paths = 5;
};

struct EventRecord {
  SimEvent event;
  bool accepted = false;  // arrivals only
  Units cpu_used_after = 0;
  Units bw_used_after = 0;
};

struct RequestRecord {
  RequestId id = 0;
  SimTime t = 0.0;
  bool accepted = false;
  Units revenue = 0;
  Units cost = 0;
  std::optional<MappingDecision> decision;
  std::optional<FragScores> scores;  // against availability at decision time
  std::string error;  // solver failure or allocation refusal, if any
};

struct TraceRecord {
  RequestId request = 0;
  IterationRecord iteration;
};

struct SimResult {
  std::vector<MetricsSnapshot> snapshots;  // one per arrival
  std::vector<RequestRecord> requests;     // one per arrival
  std::vector<EventRecord> events;         // every processed event, in order
  std::vector<TraceRecord> search_trace;
  CpnTopology final_topology;              // after every departure
  bool conservation_ok = true;             // checked after every event
};

/// Processes arrivals and departures in time order (departures first on
/// ties, then by id). Solver exceptions count as rejections.
SimResult run(const Scenario& scenario, const Solver& solver);

std::string requests_csv(const SimResult& result);
nlohmann::json summary_json(const SimResult& result, const nlohmann::json& config_echo);
std::string events_jsonl(const SimResult& result);
std::string decisions_jsonl(const SimResult& result);
std::string search_trace_jsonl(const SimResult& result);

struct ReplayReport {
  std::vector<std::string> problems;
  std::size_t accepted_checked = 0;

  bool ok() const { return problems.empty(); }
};

/// Re-validates a recorded run: every accepted decision is checked against
/// the replayed availability, allocated and released in event order, and the
/// recorded usage totals and final conservation are compared.
ReplayReport replay_trace(const CpnTopology& initial, const std::vector<ServiceEntity>& workload,
                          std::string_view events_text, std::string_view decisions_text);

}  // namespace sem
