#include "sem/search.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <thread>

#include "sem/accounting.hpp"
#include "sem/channel.hpp"
#include "sem/log.hpp"

namespace sem {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void SearchParams::validate() const {
  if (n_workers < 1 || swarm_size < 1 || max_iters < 1 || elite_size < 1 || local_archive_cap < 1 ||
      archive_cap < 1 || k_paths < 1)
    throw ModelError("search counts must all be >= 1");
  if (elite_size >= swarm_size) throw ModelError("search.elite_size must be smaller than search.swarm_size");
  if (!(balance_tolerance >= 0.0 && balance_tolerance < 1.0))
    throw ModelError("partition balance tolerance must lie in [0, 1)");
  if (!(velocity_clamp > 0.0)) throw ModelError("search.velocity_clamp must be positive");
}

std::vector<double> top_n_mask(std::span<const double> position, std::size_t n) {
  std::vector<std::size_t> idx(position.size());
  std::iota(idx.begin(), idx.end(), 0);
  n = std::min(n, position.size());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return position[a] > position[b]; });
  std::vector<double> out(position.size(), 0.0);
  double kept = 0.0;
  for (std::size_t i = 0; i < n; ++i) kept += std::max(0.0, position[idx[i]]);
  if (!(kept > 0.0)) return out;
  for (std::size_t i = 0; i < n; ++i) out[idx[i]] = std::max(0.0, position[idx[i]]) / kept;
  return out;
}

std::optional<MappingDecision> decode_position(const SearchContext& ctx, const ProportionWeights& pwv,
                                               std::uint64_t seed) {
  if (pwv.support().empty()) return std::nullopt;
  const auto caps = ctx.topology->cpu_available();
  auto part = partition_heuristic(*ctx.entity, pwv, BalanceTolerance{ctx.params.balance_tolerance}, caps, seed,
                                  ctx.partition);
  if (!part) return std::nullopt;
  auto cut = cut_links(*ctx.entity, part->assignment);
  auto flows = map_cut_links(*ctx.topology, *ctx.entity, cut, part->assignment, *ctx.table);
  if (!flows) return std::nullopt;
  return MappingDecision{ctx.entity->id, std::move(part->assignment), std::move(*flows)};
}

namespace {

// Resource-weighted pick from `pool` (weights = available CPU); pool must
// contain at least one node with positive availability.
NodeId weighted_pick(const std::set<NodeId>& pool, const CpnTopology& g, std::mt19937_64& rng) {
  std::vector<NodeId> nodes(pool.begin(), pool.end());
  std::vector<double> w;
  w.reserve(nodes.size());
  for (NodeId m : nodes) w.push_back(static_cast<double>(g.node(m).cpu_available));
  std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
  return nodes[dist(rng)];
}

void attach_solution(Particle& p, MappingDecision decision, const SearchContext& ctx) {
  p.fitness = fitness(*ctx.entity, decision, *ctx.topology, ctx.frag);
  p.solution = std::move(decision);
}

}  // namespace

InitAttempt init_solver(const SearchContext& ctx, std::mt19937_64& rng) {
  const CpnTopology& g = *ctx.topology;
  const auto n_nodes = g.node_count();
  InitAttempt out;
  out.rho.assign(n_nodes, 0.0);

  std::set<NodeId> resourced;
  for (const auto& node : g.nodes())
    if (node.cpu_available > 0) resourced.insert(node.id);
  if (resourced.empty()) return out;

  const std::size_t target = std::min(n_nodes, ctx.entity->sfs.size());
  std::set<NodeId> chosen_set;
  std::set<NodeId> current{weighted_pick(resourced, g, rng)};
  std::set<NodeId> next;
  std::set<NodeId> useless;
  std::set<NodeId> expanded_useless;
  const auto caps = g.cpu_available();

  auto classify_neighbors = [&](NodeId m) {
    for (const Neighbor& nb : g.neighbors(m)) {
      if (chosen_set.contains(nb.node)) continue;
      if (g.node(nb.node).cpu_available > 0)
        next.insert(nb.node);
      else if (!expanded_useless.contains(nb.node))
        useless.insert(nb.node);
    }
  };

  while (out.chosen.size() < target) {
    if (!current.empty()) {
      NodeId m = weighted_pick(current, g, rng);
      current.erase(m);
      chosen_set.insert(m);
      out.chosen.push_back(m);
      classify_neighbors(m);

      double total = 0.0;
      for (NodeId c : out.chosen) total += static_cast<double>(g.node(c).cpu_available);
      std::fill(out.rho.begin(), out.rho.end(), 0.0);
      for (NodeId c : out.chosen) out.rho[static_cast<std::size_t>(c)] = static_cast<double>(g.node(c).cpu_available) / total;

      auto part = partition_heuristic(*ctx.entity, ProportionWeights(out.rho),
                                      BalanceTolerance{ctx.params.balance_tolerance}, caps, rng(), ctx.partition);
      if (part) {
        out.assignment = std::move(part->assignment);
        break;
      }
    } else if (!next.empty()) {
      for (NodeId m : next)
        if (!chosen_set.contains(m)) current.insert(m);
      next.clear();
      useless.clear();
    } else if (!useless.empty()) {
      std::set<NodeId> frontier;
      frontier.swap(useless);
      next.clear();
      for (NodeId u : frontier) expanded_useless.insert(u);
      for (NodeId u : frontier) classify_neighbors(u);
    } else {
      break;
    }
  }
  return out;
}

std::vector<Particle> init_swarm(const SearchContext& ctx, std::mt19937_64& rng, std::uint64_t& next_uid) {
  const auto n_nodes = ctx.topology->node_count();
  std::vector<Particle> swarm;
  swarm.reserve(ctx.params.swarm_size);
  for (std::size_t i = 0; i < ctx.params.swarm_size; ++i) {
    Particle p;
    p.uid = next_uid++;
    p.velocity.assign(n_nodes, 0.0);
    p.dimension = n_nodes;
    if (i == 0 && ctx.init == InitMode::kRwBfs && ctx.init_decision) {
      p.position = pwv_from_assignment(*ctx.entity, ctx.init_decision->assignment, n_nodes).weights;
      attach_solution(p, *ctx.init_decision, ctx);
      swarm.push_back(std::move(p));
      continue;
    }
    InitAttempt attempt = init_solver(ctx, rng);
    p.position = std::move(attempt.rho);
    if (attempt.assignment) {
      auto cut = cut_links(*ctx.entity, *attempt.assignment);
      auto flows = map_cut_links(*ctx.topology, *ctx.entity, cut, *attempt.assignment, *ctx.table);
      if (flows) attach_solution(p, MappingDecision{ctx.entity->id, std::move(*attempt.assignment), std::move(*flows)}, ctx);
    }
    swarm.push_back(std::move(p));
  }
  return swarm;
}

bool evolve_common_set(std::span<Particle> common, std::span<const Particle> elites,
                       std::span<const Particle> local_archive, std::size_t iter, const SearchContext& ctx,
                       std::mt19937_64& rng) {
  std::vector<const Particle*> guides;
  for (const auto& p : elites) guides.push_back(&p);
  for (const auto& p : local_archive) guides.push_back(&p);
  if (guides.empty()) {
    logger().debug("request {}: no elites or local archive at iteration {}, common set left as is", ctx.entity->id, iter);
    return false;
  }
  const std::size_t dims = ctx.topology->node_count();
  std::vector<double> mean(dims, 0.0);
  for (const Particle* g : guides)
    for (std::size_t d = 0; d < dims; ++d) mean[d] += g->position[d];
  for (double& m : mean) m /= static_cast<double>(guides.size());

  const double phi = 1.0 - static_cast<double>(iter) / static_cast<double>(ctx.params.max_iters);
  const double clamp = ctx.params.velocity_clamp;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, guides.size() - 1);

  for (Particle& p : common) {
    const Particle& elite = *guides[pick(rng)];
    for (std::size_t d = 0; d < dims; ++d) {
      const double r1 = unit(rng);
      const double r2 = unit(rng);
      const double r3 = unit(rng);
      double v = r1 * p.velocity[d] + r2 * (elite.position[d] - p.position[d]) + phi * r3 * (mean[d] - p.position[d]);
      v = std::clamp(v, -clamp, clamp);
      p.velocity[d] = v;
      p.position[d] = std::max(0.0, p.position[d] + v);
    }
    std::vector<double> masked = top_n_mask(p.position, p.dimension);
    if (auto decision = decode_position(ctx, ProportionWeights(std::move(masked)), rng())) {
      attach_solution(p, std::move(*decision), ctx);
      p.dimension = std::max<std::size_t>(1, p.dimension - 1);
    }
  }
  return true;
}

Worker::Worker(const SearchContext& ctx, std::size_t index)
    : ctx_(ctx), index_(index), rng_(mix_seed(ctx.params.seed, index + 1)), next_uid_((index + 1) << 32) {}

void Worker::start() { particles_ = init_swarm(ctx_, rng_, next_uid_); }

bool Worker::step(ControllerLink& link) {
  if (done_) return false;
  std::stable_sort(particles_.begin(), particles_.end(), [](const Particle& a, const Particle& b) {
    if (a.has_solution() != b.has_solution()) return a.has_solution();
    if (a.has_solution() && *a.fitness != *b.fitness) return *a.fitness < *b.fitness;
    return a.uid < b.uid;
  });

  IterationRecord rec{index_, iter_, std::nullopt, 0, false};
  if (!particles_.empty() && particles_[0].has_solution() && (!gbest_ || *particles_[0].fitness < *gbest_->fitness)) {
    gbest_ = particles_[0];
    link.send({MessageKind::kBestParticle, index_, gbest_});
  }
  if (gbest_) rec.best_fitness = gbest_->fitness;

  const auto feasible = static_cast<std::size_t>(
      std::count_if(particles_.begin(), particles_.end(), [](const Particle& p) { return p.has_solution(); }));
  rec.feasible = feasible;
  const std::size_t n_elite = std::min(ctx_.params.elite_size, feasible);
  std::vector<std::pair<std::uint64_t, double>> signature;
  for (std::size_t i = 0; i < n_elite; ++i) signature.emplace_back(particles_[i].uid, *particles_[i].fitness);

  if (!signature.empty() && signature == previous_elites_) {
    rec.requested_guidance = true;
    std::optional<Particle> reply = link.request_guidance(index_);
    if (reply && reply->has_solution()) {
      if (local_archive_.size() < ctx_.params.local_archive_cap) {
        local_archive_.push_back(std::move(*reply));
      } else {
        auto worst = std::max_element(local_archive_.begin(), local_archive_.end(),
                                      [](const Particle& a, const Particle& b) { return *a.fitness < *b.fitness; });
        if (*reply->fitness < *worst->fitness) *worst = std::move(*reply);
      }
    }
  }
  previous_elites_ = std::move(signature);

  std::span<Particle> all(particles_);
  evolve_common_set(all.subspan(n_elite), all.first(n_elite), local_archive_, iter_, ctx_, rng_);
  records_.push_back(rec);

  if (++iter_ > ctx_.params.max_iters) {
    done_ = true;
    link.send({MessageKind::kTerminate, index_, std::nullopt});
    return false;
  }
  return true;
}

void worker_run(const SearchContext& ctx, std::size_t index, ControllerLink& link) {
  Worker worker(ctx, index);
  try {
    worker.start();
    while (worker.step(link)) {
    }
  } catch (const ChannelClosed&) {
    logger().error("worker {} aborted: controller channel closed", index);
  }
}

bool Archive::offer(Particle particle, std::mt19937_64& rng) {
  if (!particle.has_solution()) throw ContractError("archive entries must carry a solution");
  if (entries_.size() < capacity_) {
    entries_.push_back({std::move(particle), next_seq_++});
    return true;
  }
  std::size_t slot = std::uniform_int_distribution<std::size_t>(0, entries_.size() - 1)(rng);
  if (protect_best_ && entries_.size() > 1) {
    const Particle* b = best();
    if (&entries_[slot].particle == b) slot = (slot + 1) % entries_.size();
  }
  if (*particle.fitness < *entries_[slot].particle.fitness) {
    entries_[slot] = {std::move(particle), next_seq_++};
    return true;
  }
  return false;
}

std::optional<Particle> Archive::random_member(std::mt19937_64& rng) const {
  if (entries_.empty()) return std::nullopt;
  return entries_[std::uniform_int_distribution<std::size_t>(0, entries_.size() - 1)(rng)].particle;
}

const Particle* Archive::best() const {
  const Entry* best = nullptr;
  for (const auto& e : entries_)
    if (!best || *e.particle.fitness < *best->particle.fitness ||
        (*e.particle.fitness == *best->particle.fitness && e.seq < best->seq))
      best = &e;
  return best ? &best->particle : nullptr;
}

Controller::Controller(const SearchParams& params, std::uint64_t seed)
    : archive_(params.archive_cap, params.archive_protect_best), rng_(seed) {}

void Controller::handle(WorkerMessage message) {
  switch (message.kind) {
    case MessageKind::kBestParticle:
      if (message.payload) archive_.offer(std::move(*message.payload), rng_);
      break;
    case MessageKind::kTerminate:
      ++terminated_;
      break;
    case MessageKind::kNewParticleRequest:
      throw ContractError("guidance requests are answered through Controller::guidance");
  }
}

std::optional<Particle> Controller::guidance() { return archive_.random_member(rng_); }

namespace {

class DirectLink final : public ControllerLink {
 public:
  explicit DirectLink(Controller& c) : controller_(c) {}
  void send(WorkerMessage message) override { controller_.handle(std::move(message)); }
  std::optional<Particle> request_guidance(std::size_t) override { return controller_.guidance(); }

 private:
  Controller& controller_;
};

class ThreadLink final : public ControllerLink {
 public:
  ThreadLink(Channel<WorkerMessage>& inbox, Channel<std::optional<Particle>>& replies)
      : inbox_(inbox), replies_(replies) {}
  void send(WorkerMessage message) override { inbox_.send(std::move(message)); }
  std::optional<Particle> request_guidance(std::size_t worker) override {
    inbox_.send({MessageKind::kNewParticleRequest, worker, std::nullopt});
    return replies_.receive();
  }

 private:
  Channel<WorkerMessage>& inbox_;
  Channel<std::optional<Particle>>& replies_;
};

}  // namespace

SolveResult controller_solve(const SearchContext& ctx) {
  ctx.params.validate();
  const std::size_t n_workers = ctx.params.n_workers;
  Controller controller(ctx.params, mix_seed(ctx.params.seed, 0));
  std::vector<std::unique_ptr<Worker>> workers;
  for (std::size_t i = 0; i < n_workers; ++i) workers.push_back(std::make_unique<Worker>(ctx, i));

  if (ctx.params.deterministic) {
    DirectLink link(controller);
    for (auto& w : workers) w->start();
    while (controller.terminated() < n_workers)
      for (auto& w : workers)
        if (!w->done()) w->step(link);
  } else {
    Channel<WorkerMessage> inbox;
    std::vector<std::unique_ptr<Channel<std::optional<Particle>>>> replies;
    for (std::size_t i = 0; i < n_workers; ++i) replies.push_back(std::make_unique<Channel<std::optional<Particle>>>());
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < n_workers; ++i) {
      threads.emplace_back([&, i] {
        ThreadLink link(inbox, *replies[i]);
        try {
          workers[i]->start();
          while (workers[i]->step(link)) {
          }
        } catch (const ChannelClosed&) {
          logger().error("worker {} aborted: controller channel closed", i);
        } catch (const std::exception& e) {
          logger().warn("worker {} crashed ({}); counted as terminated", i, e.what());
          try {
            inbox.send({MessageKind::kTerminate, i, std::nullopt});
          } catch (const ChannelClosed&) {
          }
        }
      });
    }
    while (controller.terminated() < n_workers) {
      WorkerMessage msg = inbox.receive();
      if (msg.kind == MessageKind::kNewParticleRequest)
        replies[msg.worker]->send(controller.guidance());
      else
        controller.handle(std::move(msg));
    }
    threads.clear();
  }

  SolveResult result;
  for (const auto& w : workers) result.trace.insert(result.trace.end(), w->records().begin(), w->records().end());
  if (const Particle* best = controller.archive().best()) {
    result.decision = best->solution;
    result.fitness = best->fitness;
  }
  return result;
}

namespace {

// Minimum-cost tunnel choice over every candidate combination (branch and
// bound on an admissible one-hop-per-LL bound).
std::optional<FlowMap> route_exhaustive(const CpnTopology& topology, const ServiceEntity& entity,
                                        const std::vector<LlIndex>& cut, const Assignment& x, const PathTable& table) {
  const std::size_t n = cut.size();
  std::vector<Units> bound(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) {
    const auto& ll = entity.lls[static_cast<std::size_t>(cut[i])];
    auto cands = table.candidates(x[ll.u], x[ll.v]);
    Units min_hops = cands.empty() ? 0 : static_cast<Units>(cands.front().hops());
    bound[i] = bound[i + 1] + min_hops * ll.bw_demand;
  }
  std::vector<Units> residual(topology.link_count());
  for (std::size_t l = 0; l < residual.size(); ++l) residual[l] = topology.link(static_cast<LinkId>(l)).bw_available;
  std::vector<std::size_t> choice(n, 0);
  std::vector<std::size_t> best_choice;
  std::optional<Units> best;

  auto dfs = [&](auto&& self, std::size_t i, Units partial) -> void {
    if (best && partial + bound[i] >= *best) return;
    if (i == n) {
      best = partial;
      best_choice = choice;
      return;
    }
    const auto& ll = entity.lls[static_cast<std::size_t>(cut[i])];
    auto cands = table.candidates(x[ll.u], x[ll.v]);
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const Path& p = cands[c];
      bool fits = std::all_of(p.links.begin(), p.links.end(),
                              [&](LinkId l) { return residual[static_cast<std::size_t>(l)] >= ll.bw_demand; });
      if (!fits) continue;
      for (LinkId l : p.links) residual[static_cast<std::size_t>(l)] -= ll.bw_demand;
      choice[i] = c;
      self(self, i + 1, partial + static_cast<Units>(p.hops()) * ll.bw_demand);
      for (LinkId l : p.links) residual[static_cast<std::size_t>(l)] += ll.bw_demand;
    }
  };
  dfs(dfs, 0, 0);
  if (!best) return std::nullopt;
  FlowMap flows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ll = entity.lls[static_cast<std::size_t>(cut[i])];
    flows.emplace(cut[i], table.oriented(x[ll.u], x[ll.v], best_choice[i]));
  }
  return flows;
}

}  // namespace

std::optional<MappingDecision> exhaustive_nested_solve(const ServiceEntity& entity, const CpnTopology& topology,
                                                       const PathTable& table, NestedBounds bounds) {
  const std::size_t n = entity.sfs.size();
  const std::size_t k = topology.node_count();
  if (n > bounds.max_sfs || k > bounds.max_nodes)
    throw ContractError("exhaustive_nested_solve refused: instance exceeds " + std::to_string(bounds.max_sfs) +
                        " SFs / " + std::to_string(bounds.max_nodes) + " CNs");
  const auto caps = topology.cpu_available();

  // Outer level: every attainable load vector, i.e. every attainable rho.
  std::set<std::vector<Units>> loads;
  {
    std::vector<std::size_t> digits(n, 0);
    for (;;) {
      std::vector<Units> load(k, 0);
      for (std::size_t i = 0; i < n; ++i) load[digits[i]] += entity.sfs[i].cpu_demand;
      loads.insert(std::move(load));
      std::size_t pos = 0;
      while (pos < n && ++digits[pos] == k) digits[pos++] = 0;
      if (pos == n) break;
    }
  }

  const double total = static_cast<double>(entity.total_cpu_demand());
  std::optional<MappingDecision> best;
  Units best_cost = 0;
  for (const auto& load : loads) {
    std::vector<double> rho(k);
    for (std::size_t m = 0; m < k; ++m) rho[m] = static_cast<double>(load[m]) / total;
    const ProportionWeights pwv(rho);

    // Inner level: every assignment realising rho exactly, routed optimally.
    Assignment x = Assignment::unplaced(n);
    std::vector<Units> used(k, 0);
    auto dfs = [&](auto&& self, std::size_t i) -> void {
      if (i == n) {
        if (!check_balance(entity, x, pwv, BalanceTolerance{0.0})) return;
        for (std::size_t m = 0; m < k; ++m)
          if (used[m] > caps[m]) return;
        auto cut = cut_links(entity, x);
        auto flows = route_exhaustive(topology, entity, cut, x, table);
        if (!flows) return;
        MappingDecision d{entity.id, x, std::move(*flows)};
        Units c = cost(entity, d);
        if (!best || c < best_cost) {
          best_cost = c;
          best = std::move(d);
        }
        return;
      }
      for (std::size_t m = 0; m < k; ++m) {
        const Units dmd = entity.sfs[i].cpu_demand;
        if (used[m] + dmd > load[m]) continue;
        used[m] += dmd;
        x.placement[i] = static_cast<NodeId>(m);
        self(self, i + 1);
        x.placement[i] = kUnplaced;
        used[m] -= dmd;
      }
    };
    dfs(dfs, 0);
  }
  return best;
}

}  // namespace sem
