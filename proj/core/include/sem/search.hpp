#pragma once

// Adaptive bilevel search: a controller-worker, elite-guided particle swarm
// over proportion-weight vectors. Each particle's position is decoded into a
// mapping decision by the partitioner and the Cut-LL router; decisions are
// scored by the fragmentation fitness (lower is better).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sem/fragmentation.hpp"
#include "sem/model.hpp"
#include "sem/partition.hpp"
#include "sem/routing.hpp"

namespace sem {

struct SearchParams {
  std::size_t n_workers = 4;
  std::size_t swarm_size = 20;
  std::size_t max_iters = 50;
  std::size_t elite_size = 5;
  std::size_t local_archive_cap = 5;
  std::size_t archive_cap = 20;
  std::size_t k_paths = 5;
  std::uint64_t seed = 1;
  bool deterministic = false;
  bool archive_protect_best = false;
  double balance_tolerance = 0.05;
  double velocity_clamp = 1.0;

  void validate() const;
};

enum class InitMode { kDefault, kRwBfs };

struct Particle {
  std::uint64_t uid = 0;
  std::vector<double> position;
  std::vector<double> velocity;
  std::size_t dimension = 1;
  std::optional<MappingDecision> solution;
  std::optional<double> fitness;

  bool has_solution() const { return solution.has_value(); }
};

/// Everything a worker needs for one request; all referenced data is
/// immutable for the duration of the solve.
struct SearchContext {
  const ServiceEntity* entity = nullptr;
  const CpnTopology* topology = nullptr;
  const PathTable* table = nullptr;
  FragConfig frag;
  SearchParams params;
  PartitionOptions partition;
  InitMode init = InitMode::kDefault;
  std::optional<MappingDecision> init_decision;  // seed decision for InitMode::kRwBfs
};

/// Keeps the n largest components (ties: lower index), rescales them to sum
/// to 1 and zeroes the rest. Returns an all-zero vector if the kept mass is 0.
std::vector<double> top_n_mask(std::span<const double> position, std::size_t n);

/// Decodes a proportion-weight vector into a decision: partition, then route
/// the induced Cut-LLs. nullopt when either stage is infeasible.
std::optional<MappingDecision> decode_position(const SearchContext& ctx, const ProportionWeights& pwv,
                                               std::uint64_t seed);

/// One attempt of the semi-constrained randomized BFS initializer: returns the
/// last proportion vector tried and, on success, its assignment.
struct InitAttempt {
  std::vector<double> rho;
  std::optional<Assignment> assignment;
  std::vector<NodeId> chosen;
};
InitAttempt init_solver(const SearchContext& ctx, std::mt19937_64& rng);

std::vector<Particle> init_swarm(const SearchContext& ctx, std::mt19937_64& rng, std::uint64_t& next_uid);

/// Elite-guided velocity/position update, top-n masking and re-decoding of
/// every particle in `common`. Returns false (particles untouched) when
/// elites and local archive are both empty.
bool evolve_common_set(std::span<Particle> common, std::span<const Particle> elites,
                       std::span<const Particle> local_archive, std::size_t iter, const SearchContext& ctx,
                       std::mt19937_64& rng);

enum class MessageKind { kBestParticle, kNewParticleRequest, kTerminate };

struct WorkerMessage {
  MessageKind kind = MessageKind::kTerminate;
  std::size_t worker = 0;
  std::optional<Particle> payload;
};

/// A worker's view of the controller.
class ControllerLink {
 public:
  virtual ~ControllerLink() = default;
  virtual void send(WorkerMessage message) = 0;
  /// Sends a newP_request and waits for the reply; nullopt means "no guidance".
  virtual std::optional<Particle> request_guidance(std::size_t worker) = 0;
};

struct IterationRecord {
  std::size_t worker = 0;
  std::size_t iter = 0;
  std::optional<double> best_fitness;
  std::size_t feasible = 0;
  bool requested_guidance = false;
};

/// Single worker (one local swarm). `start` initializes the swarm; each
/// `step` runs one iteration and returns false once terminate has been sent.
class Worker {
 public:
  Worker(const SearchContext& ctx, std::size_t index);

  void start();
  bool step(ControllerLink& link);
  bool done() const { return done_; }

  std::span<const Particle> particles() const { return particles_; }
  std::span<const Particle> local_archive() const { return local_archive_; }
  const std::vector<IterationRecord>& records() const { return records_; }

 private:
  const SearchContext& ctx_;
  std::size_t index_;
  std::mt19937_64 rng_;
  std::uint64_t next_uid_;
  std::vector<Particle> particles_;
  std::vector<Particle> local_archive_;
  std::optional<Particle> gbest_;
  std::vector<std::pair<std::uint64_t, double>> previous_elites_;
  std::size_t iter_ = 1;
  bool done_ = false;
  std::vector<IterationRecord> records_;
};

/// Runs a worker to completion against `link`. A closed channel aborts the
/// worker (logged).
void worker_run(const SearchContext& ctx, std::size_t index, ControllerLink& link);

/// Bounded controller archive with insertion-order tie-breaking.
class Archive {
 public:
  explicit Archive(std::size_t capacity, bool protect_best = false) : capacity_(capacity), protect_best_(protect_best) {}

  /// Adds when below capacity; otherwise replaces a uniformly random entry if
  /// the incoming fitness is smaller. Returns true if the archive changed.
  bool offer(Particle particle, std::mt19937_64& rng);
  std::optional<Particle> random_member(std::mt19937_64& rng) const;
  /// Entry with minimum fitness; ties go to the earliest inserted.
  const Particle* best() const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Entry {
    Particle particle;
    std::uint64_t seq;
  };
  std::size_t capacity_;
  bool protect_best_;
  std::uint64_t next_seq_ = 0;
  std::vector<Entry> entries_;
};

/// Message handling per the controller event loop.
class Controller {
 public:
  Controller(const SearchParams& params, std::uint64_t seed);

  /// Handles best_particle and terminate messages.
  void handle(WorkerMessage message);
  std::optional<Particle> guidance();

  std::size_t terminated() const { return terminated_; }
  const Archive& archive() const { return archive_; }

 private:
  Archive archive_;
  std::mt19937_64 rng_;
  std::size_t terminated_ = 0;
};

struct SolveResult {
  std::optional<MappingDecision> decision;
  std::optional<double> fitness;
  std::vector<IterationRecord> trace;
};

/// Full controller-worker solve for one request. In deterministic mode the
/// workers are stepped round-robin on the calling thread; otherwise each
/// worker runs on its own thread and messages arrive asynchronously.
SolveResult controller_solve(const SearchContext& ctx);

struct NestedBounds {
  std::size_t max_sfs = 6;
  std::size_t max_nodes = 4;
};

/// Outer enumeration of every attainable proportion vector, inner exact
/// solve (all assignments realising it exactly, exhaustive tunnel choice).
/// Returns a minimum-cost feasible decision, or nullopt when none exists.
/// Throws ContractError above the bounds.
std::optional<MappingDecision> exhaustive_nested_solve(const ServiceEntity& entity, const CpnTopology& topology,
                                                       const PathTable& table, NestedBounds bounds = {});

/// Deterministic 64-bit seed mixing.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sem
