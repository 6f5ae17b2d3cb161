#include "sem/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace sem {

namespace {

void check_range(const UnitRange& r, const char* what) {
  if (r.lo <= 0 || r.hi < r.lo) throw ModelError(std::string(what) + " range must be a positive interval");
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

using Edge = std::pair<std::size_t, std::size_t>;

bool connected_without(std::size_t n, const std::set<Edge>& edges, const Edge& skip) {
  DisjointSet ds(n);
  std::size_t comps = n;
  for (const Edge& e : edges)
    if (e != skip && ds.unite(e.first, e.second)) --comps;
  return comps == 1;
}

}  // namespace

CpnTopology generate_random_cpn(std::size_t n_nodes, std::size_t n_links, UnitRange cpu, UnitRange bw,
                                std::uint64_t seed, WaxmanParams waxman) {
  if (n_nodes < 1) throw ModelError("topology needs at least one node");
  const std::size_t max_links = n_nodes * (n_nodes - 1) / 2;
  if (n_links + 1 < n_nodes) throw ModelError("link count too small to connect all nodes");
  if (n_links > max_links)
    throw ModelError("link count " + std::to_string(n_links) + " exceeds n(n-1)/2 = " + std::to_string(max_links));
  check_range(cpu, "CPU");
  check_range(bw, "bandwidth");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> xs(n_nodes), ys(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    xs[i] = unit(rng);
    ys[i] = unit(rng);
  }
  const double scale = std::sqrt(2.0);
  auto waxman_p = [&](std::size_t a, std::size_t b) {
    double d = std::hypot(xs[a] - xs[b], ys[a] - ys[b]);
    return waxman.alpha * std::exp(-d / (waxman.beta * scale));
  };

  std::set<Edge> edges;
  for (std::size_t a = 0; a < n_nodes; ++a)
    for (std::size_t b = a + 1; b < n_nodes; ++b)
      if (unit(rng) < waxman_p(a, b)) edges.insert({a, b});

  // Join components through their most likely Waxman pair.
  DisjointSet ds(n_nodes);
  for (const Edge& e : edges) ds.unite(e.first, e.second);
  for (;;) {
    std::size_t root0 = ds.find(0);
    double best = -1.0;
    Edge pick{0, 0};
    for (std::size_t a = 0; a < n_nodes; ++a) {
      if (ds.find(a) != root0) continue;
      for (std::size_t b = 0; b < n_nodes; ++b) {
        if (ds.find(b) == root0) continue;
        double p = waxman_p(a, b);
        if (p > best) {
          best = p;
          pick = {std::min(a, b), std::max(a, b)};
        }
      }
    }
    if (best < 0.0) break;
    edges.insert(pick);
    ds.unite(pick.first, pick.second);
  }

  if (edges.size() > n_links) {
    std::vector<Edge> order(edges.begin(), edges.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (const Edge& e : order) {
      if (edges.size() == n_links) break;
      if (connected_without(n_nodes, edges, e)) edges.erase(e);
    }
    if (edges.size() != n_links) throw ModelError("could not thin topology to the requested link count");
  } else if (edges.size() < n_links) {
    std::vector<Edge> missing;
    std::vector<double> weight;
    for (std::size_t a = 0; a < n_nodes; ++a)
      for (std::size_t b = a + 1; b < n_nodes; ++b)
        if (!edges.contains({a, b})) {
          missing.push_back({a, b});
          weight.push_back(waxman_p(a, b));
        }
    // Weighted sampling without replacement via exponential keys.
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(missing.size());
    for (std::size_t i = 0; i < missing.size(); ++i) {
      double u = std::max(unit(rng), 1e-300);
      keys.emplace_back(std::log(u) / std::max(weight[i], 1e-300), i);
    }
    std::sort(keys.begin(), keys.end(), std::greater<>());
    for (std::size_t i = 0; edges.size() < n_links; ++i) edges.insert(missing[keys[i].second]);
  }

  std::uniform_int_distribution<Units> cpu_dist(cpu.lo, cpu.hi);
  std::uniform_int_distribution<Units> bw_dist(bw.lo, bw.hi);
  std::vector<CpnNode> nodes;
  nodes.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    Units c = cpu_dist(rng);
    nodes.push_back({static_cast<NodeId>(i), c, c});
  }
  std::vector<CpnLink> links;
  links.reserve(edges.size());
  for (const Edge& e : edges) {
    Units b = bw_dist(rng);
    links.push_back({static_cast<NodeId>(e.first), static_cast<NodeId>(e.second), b, b});
  }
  return CpnTopology(std::move(nodes), std::move(links));
}

ServiceEntity generate_service_entity(const EntityParams& params, std::uint64_t seed, RequestId id) {
  if (params.size.lo < 2 || params.size.hi < params.size.lo) throw ModelError("entity size range must start at >= 2");
  if (!(params.density >= 0.0 && params.density <= 1.0)) throw ModelError("density must lie in [0, 1]");
  check_range(params.demand, "demand");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Units> size_dist(params.size.lo, params.size.hi);
  const auto n = static_cast<std::size_t>(size_dist(rng));

  // Uniform spanning tree of K_n from a random Pruefer sequence.
  std::set<Edge> edges;
  if (n == 2) {
    edges.insert({0, 1});
  } else {
    std::uniform_int_distribution<std::size_t> node_dist(0, n - 1);
    std::vector<std::size_t> pruefer(n - 2);
    for (auto& p : pruefer) p = node_dist(rng);
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t p : pruefer) ++degree[p];
    std::set<std::size_t> leaves;
    for (std::size_t i = 0; i < n; ++i)
      if (degree[i] == 1) leaves.insert(i);
    for (std::size_t p : pruefer) {
      std::size_t leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edges.insert({std::min(leaf, p), std::max(leaf, p)});
      if (--degree[p] == 1) leaves.insert(p);
    }
    std::size_t a = *leaves.begin();
    std::size_t b = *std::next(leaves.begin());
    edges.insert({a, b});
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double draw = unit(rng);  // drawn for every pair so density changes do not reshuffle demands
      if (!edges.contains({a, b}) && draw < params.density) edges.insert({a, b});
    }

  std::uniform_int_distribution<Units> demand(params.demand.lo, params.demand.hi);
  ServiceEntity e;
  e.id = id;
  for (std::size_t i = 0; i < n; ++i) e.sfs.push_back({static_cast<std::int64_t>(i), demand(rng)});
  for (const Edge& ed : edges) e.lls.push_back({static_cast<SfIndex>(ed.first), static_cast<SfIndex>(ed.second), demand(rng)});
  return e;
}

}  // namespace sem
