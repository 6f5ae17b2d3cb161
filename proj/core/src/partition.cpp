#include "sem/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sem {

void ProportionWeights::validate() const {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ModelError("proportion weights must be finite and non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ModelError("proportion weights sum to " + std::to_string(sum) + ", not 1");
}

std::vector<NodeId> ProportionWeights::support() const {
  std::vector<NodeId> out;
  for (std::size_t m = 0; m < weights.size(); ++m)
    if (weights[m] > 0.0) out.push_back(static_cast<NodeId>(m));
  return out;
}

namespace {

// Integer load window [lo, hi] for one supported CN.
struct PartWindow {
  NodeId node;
  Units lo;
  Units hi;
  double target;
};

Units lower_bound_units(double rho, double theta, Units total) {
  const double d = static_cast<double>(total);
  return std::max<Units>(0, static_cast<Units>(std::ceil((1.0 - theta) * rho * d - kBalanceSlack * d)));
}

Units upper_bound_units(double rho, double theta, Units total) {
  const double d = static_cast<double>(total);
  return static_cast<Units>(std::floor((1.0 + theta) * rho * d + kBalanceSlack * d));
}

std::optional<std::vector<PartWindow>> make_windows(Units total, const ProportionWeights& pwv, double theta,
                                                    std::span<const Units> capacities) {
  std::vector<PartWindow> out;
  Units lo_sum = 0;
  Units hi_sum = 0;
  for (NodeId m : pwv.support()) {
    const double rho = pwv[m];
    Units cap = static_cast<std::size_t>(m) < capacities.size() ? capacities[static_cast<std::size_t>(m)] : 0;
    PartWindow w{m, lower_bound_units(rho, theta, total), std::min(upper_bound_units(rho, theta, total), cap),
                 rho * static_cast<double>(total)};
    if (w.lo > w.hi) return std::nullopt;
    lo_sum += w.lo;
    hi_sum += w.hi;
    out.push_back(w);
  }
  if (out.empty() || lo_sum > total || hi_sum < total) return std::nullopt;
  return out;
}

void require_shapes(const ServiceEntity& entity, const ProportionWeights& pwv, std::span<const Units> capacities) {
  if (entity.sfs.empty()) throw ContractError("partition of an empty entity");
  if (pwv.support().empty()) throw ContractError("proportion weights have empty support");
  if (capacities.size() != pwv.size()) throw ContractError("capacity vector and proportion weights differ in length");
}

// One level of the multilevel hierarchy with a dense edge-weight matrix
// (service entities are small enough for this to be the cheapest layout).
struct Level {
  std::size_t n = 0;
  std::vector<Units> vw;
  std::vector<Units> w;              // n*n, symmetric, zero diagonal
  std::vector<std::size_t> to_coarse;  // finer-level vertex -> this level's vertex (empty for finest)

  Units weight(std::size_t a, std::size_t b) const { return w[a * n + b]; }
};

Level finest_level(const ServiceEntity& entity) {
  Level lv;
  lv.n = entity.sfs.size();
  lv.vw.resize(lv.n);
  for (std::size_t i = 0; i < lv.n; ++i) lv.vw[i] = entity.sfs[i].cpu_demand;
  lv.w.assign(lv.n * lv.n, 0);
  for (const auto& ll : entity.lls) {
    auto a = static_cast<std::size_t>(ll.u);
    auto b = static_cast<std::size_t>(ll.v);
    lv.w[a * lv.n + b] += ll.bw_demand;
    lv.w[b * lv.n + a] += ll.bw_demand;
  }
  return lv;
}

// Heavy-edge matching; returns nullopt when the reduction is too small to be useful.
std::optional<Level> coarsen(const Level& fine, Units max_vertex_weight, std::mt19937_64& rng) {
  std::vector<std::size_t> order(fine.n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::ptrdiff_t> mate(fine.n, -1);
  std::size_t pairs = 0;
  for (std::size_t v : order) {
    if (mate[v] >= 0) continue;
    std::ptrdiff_t best = -1;
    Units best_w = 0;
    for (std::size_t u = 0; u < fine.n; ++u) {
      if (u == v || mate[u] >= 0) continue;
      Units wt = fine.weight(v, u);
      if (wt > best_w && fine.vw[v] + fine.vw[u] <= max_vertex_weight) {
        best_w = wt;
        best = static_cast<std::ptrdiff_t>(u);
      }
    }
    if (best >= 0) {
      mate[v] = best;
      mate[static_cast<std::size_t>(best)] = static_cast<std::ptrdiff_t>(v);
      ++pairs;
    } else {
      mate[v] = static_cast<std::ptrdiff_t>(v);
    }
  }
  const std::size_t coarse_n = fine.n - pairs;
  if (pairs == 0 || coarse_n * 10 > fine.n * 9) return std::nullopt;

  Level c;
  c.n = coarse_n;
  c.to_coarse.assign(fine.n, 0);
  std::vector<char> done(fine.n, 0);
  std::size_t next = 0;
  for (std::size_t v = 0; v < fine.n; ++v) {
    if (done[v]) continue;
    auto u = static_cast<std::size_t>(mate[v]);
    c.to_coarse[v] = next;
    c.to_coarse[u] = next;
    done[v] = done[u] = 1;
    ++next;
  }
  c.vw.assign(c.n, 0);
  for (std::size_t v = 0; v < fine.n; ++v) c.vw[c.to_coarse[v]] += fine.vw[v];
  c.w.assign(c.n * c.n, 0);
  for (std::size_t a = 0; a < fine.n; ++a)
    for (std::size_t b = 0; b < fine.n; ++b) {
      std::size_t ca = c.to_coarse[a];
      std::size_t cb = c.to_coarse[b];
      if (ca != cb) c.w[ca * c.n + cb] += fine.weight(a, b);
    }
  return c;
}

// Partition state on one level with per-vertex connectivity to every part.
class PartState {
 public:
  PartState(const Level& level, const std::vector<PartWindow>& windows, std::vector<std::size_t> part)
      : lv_(level), win_(windows), k_(windows.size()), part_(std::move(part)) {
    load_.assign(k_, 0);
    conn_.assign(lv_.n * k_, 0);
    for (std::size_t v = 0; v < lv_.n; ++v) load_[part_[v]] += lv_.vw[v];
    for (std::size_t v = 0; v < lv_.n; ++v)
      for (std::size_t u = 0; u < lv_.n; ++u) conn_[v * k_ + part_[u]] += lv_.weight(v, u);
  }

  const std::vector<std::size_t>& parts() const { return part_; }

  Units cut() const {
    Units twice = 0;
    for (std::size_t v = 0; v < lv_.n; ++v)
      for (std::size_t p = 0; p < k_; ++p)
        if (p != part_[v]) twice += conn_[v * k_ + p];
    return twice / 2;
  }

  Units violation() const {
    Units total = 0;
    for (std::size_t p = 0; p < k_; ++p) total += part_violation(p, load_[p]);
    return total;
  }

  bool balanced() const { return violation() == 0; }

  // Greedy balance repair by single moves then pair swaps.
  bool repair() {
    for (std::size_t guard = 0; guard < lv_.n * (k_ + 1) * 4; ++guard) {
      const Units current = violation();
      if (current == 0) return true;
      if (!best_repair_move(current) && !best_repair_swap(current)) return false;
    }
    return balanced();
  }

  // Positive-gain moves and swaps that keep every part inside its window.
  void refine(int passes) {
    for (int pass = 0; pass < passes; ++pass) {
      bool improved = false;
      for (std::size_t v = 0; v < lv_.n; ++v) {
        const std::size_t from = part_[v];
        std::size_t best_to = k_;
        Units best_gain = 0;
        for (std::size_t to = 0; to < k_; ++to) {
          if (to == from) continue;
          Units gain = conn_[v * k_ + to] - conn_[v * k_ + from];
          if (gain > best_gain && in_window(from, load_[from] - lv_.vw[v]) && in_window(to, load_[to] + lv_.vw[v])) {
            best_gain = gain;
            best_to = to;
          }
        }
        if (best_to != k_) {
          move(v, best_to);
          improved = true;
        }
      }
      for (std::size_t u = 0; u < lv_.n; ++u)
        for (std::size_t v = u + 1; v < lv_.n; ++v) {
          const std::size_t pu = part_[u];
          const std::size_t pv = part_[v];
          if (pu == pv) continue;
          Units gain = conn_[u * k_ + pv] - conn_[u * k_ + pu] + conn_[v * k_ + pu] - conn_[v * k_ + pv] -
                       2 * lv_.weight(u, v);
          if (gain <= 0) continue;
          if (!in_window(pu, load_[pu] - lv_.vw[u] + lv_.vw[v]) || !in_window(pv, load_[pv] - lv_.vw[v] + lv_.vw[u]))
            continue;
          move(u, pv);
          move(v, pu);
          improved = true;
        }
      if (!improved) break;
    }
  }

 private:
  Units part_violation(std::size_t p, Units load) const {
    if (load > win_[p].hi) return load - win_[p].hi;
    if (load < win_[p].lo) return win_[p].lo - load;
    return 0;
  }

  bool in_window(std::size_t p, Units load) const { return load >= win_[p].lo && load <= win_[p].hi; }

  void move(std::size_t v, std::size_t to) {
    const std::size_t from = part_[v];
    load_[from] -= lv_.vw[v];
    load_[to] += lv_.vw[v];
    part_[v] = to;
    for (std::size_t u = 0; u < lv_.n; ++u) {
      Units wt = lv_.weight(u, v);
      if (wt == 0) continue;
      conn_[u * k_ + from] -= wt;
      conn_[u * k_ + to] += wt;
    }
  }

  bool best_repair_move(Units current) {
    Units best_v = current;
    Units best_gain = 0;
    std::size_t pick_v = lv_.n;
    std::size_t pick_to = k_;
    for (std::size_t v = 0; v < lv_.n; ++v) {
      const std::size_t from = part_[v];
      for (std::size_t to = 0; to < k_; ++to) {
        if (to == from) continue;
        Units after = current - part_violation(from, load_[from]) - part_violation(to, load_[to]) +
                      part_violation(from, load_[from] - lv_.vw[v]) + part_violation(to, load_[to] + lv_.vw[v]);
        Units gain = conn_[v * k_ + to] - conn_[v * k_ + from];
        if (after < best_v || (after == best_v && pick_v != lv_.n && gain > best_gain)) {
          best_v = after;
          best_gain = gain;
          pick_v = v;
          pick_to = to;
        }
      }
    }
    if (pick_v == lv_.n) return false;
    move(pick_v, pick_to);
    return true;
  }

  bool best_repair_swap(Units current) {
    Units best_v = current;
    std::size_t pick_u = lv_.n;
    std::size_t pick_v = lv_.n;
    for (std::size_t u = 0; u < lv_.n; ++u)
      for (std::size_t v = u + 1; v < lv_.n; ++v) {
        const std::size_t pu = part_[u];
        const std::size_t pv = part_[v];
        if (pu == pv || lv_.vw[u] == lv_.vw[v]) continue;
        const Units delta = lv_.vw[v] - lv_.vw[u];
        Units after = current - part_violation(pu, load_[pu]) - part_violation(pv, load_[pv]) +
                      part_violation(pu, load_[pu] + delta) + part_violation(pv, load_[pv] - delta);
        if (after < best_v) {
          best_v = after;
          pick_u = u;
          pick_v = v;
        }
      }
    if (pick_u == lv_.n) return false;
    const std::size_t pu = part_[pick_u];
    move(pick_u, part_[pick_v]);
    move(pick_v, pu);
    return true;
  }

  const Level& lv_;
  const std::vector<PartWindow>& win_;
  std::size_t k_;
  std::vector<std::size_t> part_;
  std::vector<Units> load_;
  std::vector<Units> conn_;
};

// Grow each part (smallest target first) from a random seed vertex by
// strongest connection; the largest part takes whatever remains.
std::vector<std::size_t> grow_initial(const Level& lv, const std::vector<PartWindow>& windows, std::mt19937_64& rng) {
  const std::size_t k = windows.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return windows[a].target < windows[b].target; });
  const std::size_t unset = k;
  std::vector<std::size_t> part(lv.n, unset);
  std::size_t remaining = lv.n;

  for (std::size_t oi = 0; oi + 1 < k && remaining > 0; ++oi) {
    const std::size_t p = order[oi];
    Units load = 0;
    std::vector<Units> pull(lv.n, 0);  // connection of each unassigned vertex to the region
    bool first = true;
    while (remaining > 0 && static_cast<double>(load) < windows[p].target) {
      std::size_t pick = lv.n;
      if (first) {
        std::vector<std::size_t> candidates;
        for (std::size_t v = 0; v < lv.n; ++v)
          if (part[v] == unset && load + lv.vw[v] <= windows[p].hi) candidates.push_back(v);
        if (candidates.empty()) break;
        pick = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
        first = false;
      } else {
        Units best = -1;
        for (std::size_t v = 0; v < lv.n; ++v) {
          if (part[v] != unset || load + lv.vw[v] > windows[p].hi) continue;
          if (pull[v] > best) {
            best = pull[v];
            pick = v;
          }
        }
        if (pick == lv.n) break;
      }
      part[pick] = p;
      load += lv.vw[pick];
      --remaining;
      for (std::size_t u = 0; u < lv.n; ++u) pull[u] += lv.weight(u, pick);
    }
  }
  const std::size_t last = order.back();
  for (auto& p : part)
    if (p == unset) p = last;
  return part;
}

// Bounded depth-first search for any assignment inside every window, used
// when greedy repair stalls. Heavy vertices go first; each vertex tries its
// hinted part before the others.
std::optional<std::vector<std::size_t>> balance_search(const Level& lv, const std::vector<PartWindow>& windows,
                                                       const std::vector<std::size_t>& hint, std::size_t budget) {
  const std::size_t k = windows.size();
  std::vector<std::size_t> order(lv.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lv.vw[a] > lv.vw[b]; });
  std::vector<Units> suffix(lv.n + 1, 0);
  for (std::size_t i = lv.n; i-- > 0;) suffix[i] = suffix[i + 1] + lv.vw[order[i]];

  std::vector<Units> load(k, 0);
  std::vector<std::size_t> part(lv.n, k);
  std::size_t expansions = 0;

  auto fits_remaining = [&](std::size_t i) {
    Units need = 0;
    Units room = 0;
    for (std::size_t p = 0; p < k; ++p) {
      need += std::max<Units>(0, windows[p].lo - load[p]);
      room += windows[p].hi - load[p];
    }
    return suffix[i] >= need && suffix[i] <= room;
  };

  auto dfs = [&](auto&& self, std::size_t i) -> bool {
    if (i == lv.n) return true;
    if (++expansions > budget) return false;
    const std::size_t v = order[i];
    std::vector<std::size_t> tries{hint[v]};
    for (std::size_t p = 0; p < k; ++p)
      if (p != hint[v]) tries.push_back(p);
    for (std::size_t p : tries) {
      if (load[p] + lv.vw[v] > windows[p].hi) continue;
      load[p] += lv.vw[v];
      part[v] = p;
      if (fits_remaining(i + 1) && self(self, i + 1)) return true;
      load[p] -= lv.vw[v];
      part[v] = k;
      if (expansions > budget) return false;
    }
    return false;
  };
  if (!fits_remaining(0) || !dfs(dfs, 0)) return std::nullopt;
  return part;
}

std::optional<PartitionResult> heuristic_at(const ServiceEntity& entity, const ProportionWeights& pwv, double theta,
                                            std::span<const Units> capacities, std::uint64_t seed,
                                            const PartitionOptions& options) {
  const Units total = entity.total_cpu_demand();
  auto windows = make_windows(total, pwv, theta, capacities);
  if (!windows) return std::nullopt;
  const std::size_t k = windows->size();

  if (k == 1) {
    PartitionResult r{Assignment(std::vector<NodeId>(entity.sfs.size(), (*windows)[0].node)), 0, theta};
    return r;
  }

  const Level finest = finest_level(entity);
  Units max_demand = *std::max_element(finest.vw.begin(), finest.vw.end());
  Units max_vertex_weight = std::max<Units>(max_demand, (total + 3 * static_cast<Units>(k) - 1) / (3 * static_cast<Units>(k)));

  std::optional<PartitionResult> best;
  std::vector<std::size_t> stalled;
  for (int trial = 0; trial < std::max(1, options.trials); ++trial) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(trial) * 0xBF58476D1CE4E5B9ULL + 1);
    std::vector<Level> levels{finest};
    while (levels.back().n > std::max(options.coarsen_floor, 2 * k)) {
      auto next = coarsen(levels.back(), max_vertex_weight, rng);
      if (!next) break;
      levels.push_back(std::move(*next));
    }

    std::vector<std::size_t> part = grow_initial(levels.back(), *windows, rng);
    for (std::size_t li = levels.size(); li-- > 0;) {
      if (li + 1 < levels.size()) {
        const Level& coarser = levels[li + 1];
        std::vector<std::size_t> projected(levels[li].n);
        for (std::size_t v = 0; v < levels[li].n; ++v) projected[v] = part[coarser.to_coarse[v]];
        part = std::move(projected);
      }
      PartState state(levels[li], *windows, part);
      state.repair();
      if (state.balanced()) state.refine(options.refinement_passes);
      part = state.parts();
      if (li == 0 && !state.balanced()) stalled = part;
      if (li == 0 && state.balanced()) {
        std::vector<NodeId> placement(entity.sfs.size());
        for (std::size_t v = 0; v < placement.size(); ++v) placement[v] = (*windows)[part[v]].node;
        PartitionResult r{Assignment(std::move(placement)), state.cut(), theta};
        if (!best || r.cut < best->cut) best = std::move(r);
      }
    }
  }
  if (!best && !stalled.empty()) {
    if (auto found = balance_search(finest, *windows, stalled, options.balance_search_budget)) {
      PartState state(finest, *windows, std::move(*found));
      state.refine(options.refinement_passes);
      std::vector<NodeId> placement(entity.sfs.size());
      for (std::size_t v = 0; v < placement.size(); ++v) placement[v] = (*windows)[state.parts()[v]].node;
      best = PartitionResult{Assignment(std::move(placement)), state.cut(), theta};
    }
  }
  return best;
}

}  // namespace

bool check_balance(const ServiceEntity& entity, const Assignment& assignment, const ProportionWeights& pwv,
                   BalanceTolerance tol) {
  if (assignment.size() != entity.sfs.size()) return false;
  const Units total = entity.total_cpu_demand();
  if (total <= 0) return false;
  std::vector<Units> load(pwv.size(), 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    NodeId m = assignment.placement[i];
    if (m < 0 || static_cast<std::size_t>(m) >= pwv.size()) return false;
    if (!(pwv[m] > 0.0)) return false;
    load[static_cast<std::size_t>(m)] += entity.sfs[i].cpu_demand;
  }
  const double d = static_cast<double>(total);
  for (std::size_t m = 0; m < pwv.size(); ++m) {
    const double rho = pwv.weights[m];
    if (!(rho > 0.0)) continue;
    const double frac = static_cast<double>(load[m]) / d;
    if (frac < (1.0 - tol.theta) * rho - kBalanceSlack) return false;
    if (frac > (1.0 + tol.theta) * rho + kBalanceSlack) return false;
  }
  return true;
}

ProportionWeights pwv_from_assignment(const ServiceEntity& entity, const Assignment& assignment,
                                      std::size_t node_count) {
  if (!assignment.total() || assignment.size() != entity.sfs.size())
    throw ContractError("pwv_from_assignment requires a total assignment");
  std::vector<Units> load(node_count, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    auto m = static_cast<std::size_t>(assignment.placement[i]);
    if (m >= node_count) throw ContractError("assignment references CN outside the topology");
    load[m] += entity.sfs[i].cpu_demand;
  }
  const double total = static_cast<double>(entity.total_cpu_demand());
  std::vector<double> w(node_count, 0.0);
  for (std::size_t m = 0; m < node_count; ++m) w[m] = static_cast<double>(load[m]) / total;
  return ProportionWeights(std::move(w));
}

std::optional<PartitionResult> partition_heuristic(const ServiceEntity& entity, const ProportionWeights& pwv,
                                                   BalanceTolerance tol, std::span<const Units> capacities,
                                                   std::uint64_t seed, const PartitionOptions& options) {
  require_shapes(entity, pwv, capacities);
  if (!(tol.theta >= 0.0 && tol.theta < 1.0)) throw ContractError("balance tolerance must lie in [0, 1)");
  for (double theta = tol.theta;; theta += options.relax_step) {
    if (auto r = heuristic_at(entity, pwv, std::min(theta, 0.999999), capacities, seed, options)) return r;
    if (options.relax_step <= 0.0 || theta + options.relax_step > options.relax_limit + 1e-12) break;
  }
  return std::nullopt;
}

std::optional<PartitionResult> partition_exact(const ServiceEntity& entity, const ProportionWeights& pwv,
                                               BalanceTolerance tol, std::span<const Units> capacities,
                                               std::size_t max_sfs) {
  require_shapes(entity, pwv, capacities);
  if (entity.sfs.size() > max_sfs)
    throw ContractError("partition_exact refused: " + std::to_string(entity.sfs.size()) + " SFs exceeds bound " +
                        std::to_string(max_sfs));
  const Units total = entity.total_cpu_demand();
  auto windows = make_windows(total, pwv, tol.theta, capacities);
  if (!windows) return std::nullopt;

  const std::size_t n = entity.sfs.size();
  const std::size_t k = windows->size();
  auto adj = entity_adjacency(entity);
  std::vector<std::size_t> part(n, k);
  std::vector<Units> load(k, 0);
  std::vector<Units> suffix(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + entity.sfs[i].cpu_demand;

  std::optional<PartitionResult> best;
  std::vector<std::size_t> best_part;
  Units best_cut = 0;

  auto dfs = [&](auto&& self, std::size_t i, Units cut) -> void {
    if (best && cut >= best_cut) return;
    for (std::size_t p = 0; p < k; ++p)
      if (load[p] + suffix[i] < (*windows)[p].lo) return;
    if (i == n) {
      best_cut = cut;
      best_part = part;
      best = PartitionResult{};
      return;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const Units d = entity.sfs[i].cpu_demand;
      if (load[p] + d > (*windows)[p].hi) continue;
      Units added = 0;
      for (auto [nb, ll] : adj[i])
        if (static_cast<std::size_t>(nb) < i && part[static_cast<std::size_t>(nb)] != p)
          added += entity.lls[static_cast<std::size_t>(ll)].bw_demand;
      part[i] = p;
      load[p] += d;
      self(self, i + 1, cut + added);
      load[p] -= d;
      part[i] = k;
    }
  };
  dfs(dfs, 0, 0);

  if (!best) return std::nullopt;
  std::vector<NodeId> placement(n);
  for (std::size_t i = 0; i < n; ++i) placement[i] = (*windows)[best_part[i]].node;
  return PartitionResult{Assignment(std::move(placement)), best_cut, tol.theta};
}

}  // namespace sem
