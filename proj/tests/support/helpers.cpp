#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace semtest {

CpnTopology make_topology(const std::vector<Units>& cpu, const std::vector<std::tuple<int, int, Units>>& links) {
  std::vector<sem::CpnNode> nodes;
  for (std::size_t i = 0; i < cpu.size(); ++i) nodes.push_back({static_cast<NodeId>(i), cpu[i], cpu[i]});
  std::vector<sem::CpnLink> ls;
  for (const auto& [u, v, bw] : links) ls.push_back({u, v, bw, bw});
  return CpnTopology(std::move(nodes), std::move(ls));
}

ServiceEntity make_entity(const std::vector<Units>& cpu, const std::vector<std::tuple<int, int, Units>>& lls,
                          sem::RequestId id) {
  ServiceEntity e;
  e.id = id;
  for (std::size_t i = 0; i < cpu.size(); ++i) e.sfs.push_back({static_cast<std::int64_t>(i), cpu[i]});
  for (const auto& [u, v, bw] : lls) e.lls.push_back({u, v, bw});
  return e;
}

std::vector<std::vector<NodeId>> all_simple_paths(const CpnTopology& g, NodeId s, NodeId t) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> cur{s};
  std::vector<bool> on(g.node_count(), false);
  on[static_cast<std::size_t>(s)] = true;
  std::function<void(NodeId)> dfs = [&](NodeId u) {
    if (u == t) {
      out.push_back(cur);
      return;
    }
    for (const auto& nb : g.neighbors(u)) {
      if (on[static_cast<std::size_t>(nb.node)]) continue;
      on[static_cast<std::size_t>(nb.node)] = true;
      cur.push_back(nb.node);
      dfs(nb.node);
      cur.pop_back();
      on[static_cast<std::size_t>(nb.node)] = false;
    }
  };
  dfs(s);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

std::optional<Units> brute_min_cut(const ServiceEntity& e, const std::vector<double>& rho, double theta,
                                   const std::vector<Units>& caps) {
  const std::size_t n = e.sfs.size();
  const std::size_t k = rho.size();
  Units total = 0;
  for (const auto& sf : e.sfs) total += sf.cpu_demand;
  std::optional<Units> best;
  std::vector<std::size_t> x(n, 0);
  for (;;) {
    std::vector<Units> load(k, 0);
    for (std::size_t i = 0; i < n; ++i) load[x[i]] += e.sfs[i].cpu_demand;
    bool ok = true;
    for (std::size_t m = 0; m < k && ok; ++m) {
      if (load[m] > caps[m]) ok = false;
      if (rho[m] == 0.0 && load[m] > 0) ok = false;
      const double frac = static_cast<double>(load[m]) / static_cast<double>(total);
      if (frac < (1.0 - theta) * rho[m] - 1e-9 || frac > (1.0 + theta) * rho[m] + 1e-9) ok = false;
    }
    if (ok) {
      Units cut = 0;
      for (const auto& ll : e.lls)
        if (x[static_cast<std::size_t>(ll.u)] != x[static_cast<std::size_t>(ll.v)]) cut += ll.bw_demand;
      if (!best || cut < *best) best = cut;
    }
    std::size_t pos = 0;
    while (pos < n && ++x[pos] == k) x[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

std::optional<Units> brute_route(const CpnTopology& g, const std::vector<Units>& bw,
                                 const std::vector<std::vector<std::vector<NodeId>>>& paths) {
  const std::size_t n = bw.size();
  std::optional<Units> best;
  std::vector<std::size_t> pick(n, 0);
  for (const auto& p : paths)
    if (p.empty()) return std::nullopt;
  for (;;) {
    std::map<sem::LinkId, Units> load;
    Units c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& nodes = paths[i][pick[i]];
      for (std::size_t h = 0; h + 1 < nodes.size(); ++h) load[*g.find_link(nodes[h], nodes[h + 1])] += bw[i];
      c += static_cast<Units>(nodes.size() - 1) * bw[i];
    }
    bool ok = true;
    for (const auto& [l, amount] : load)
      if (amount > g.link(l).bw_available) ok = false;
    if (ok && (!best || c < *best)) best = c;
    std::size_t pos = 0;
    while (pos < n && ++pick[pos] == paths[pos].size()) pick[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

std::vector<double> reference_walk(const CpnTopology& g, double damping, int iters) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> bw(n, std::vector<double>(n, 0.0));
  for (const auto& l : g.links()) {
    bw[static_cast<std::size_t>(l.u)][static_cast<std::size_t>(l.v)] = static_cast<double>(l.bw_available);
    bw[static_cast<std::size_t>(l.v)][static_cast<std::size_t>(l.u)] = static_cast<double>(l.bw_available);
  }
  std::vector<double> mass(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += bw[i][j];
    mass[i] = static_cast<double>(g.node(static_cast<NodeId>(i)).cpu_available) * s;
    total += mass[i];
  }
  for (double& m : mass) m /= total;
  // P[i][j] = bw(i,j) mass(j) / sum_j' bw(i,j') mass(j')
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += bw[i][j] * mass[j];
    for (std::size_t j = 0; j < n; ++j) p[i][j] = row > 0.0 ? bw[i][j] * mass[j] / row : mass[j];
  }
  std::vector<double> s = mass;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> next(n);
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += s[i] * p[i][j];
      next[j] = (1.0 - damping) * mass[j] + damping * acc;
    }
    s = next;
  }
  return s;
}

double mann_whitney_greater(const std::vector<double>& a, const std::vector<double>& b) {
  struct Obs {
    double v;
    int group;
  };
  std::vector<Obs> all;
  for (double v : a) all.push_back({v, 0});
  for (double v : b) all.push_back({v, 1});
  std::sort(all.begin(), all.end(), [](const Obs& x, const Obs& y) { return x.v < y.v; });
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].v == all[i].v) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t q = i; q < j; ++q)
      if (all[q].group == 0) rank_sum_a += avg;
    i = j;
  }
  const double u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = (u - mean - 0.5) / std::sqrt(var);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace semtest
