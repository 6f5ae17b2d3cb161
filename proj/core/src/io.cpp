#include "sem/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace sem {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view tok, std::size_t line, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("expected integer ") + what + ", got '" + std::string(tok) + "'");
  return v;
}

}  // namespace

CpnTopology load_cpn_edge_list(std::string_view text) {
  auto lines = lines_of(text);
  std::size_t pos = 0;
  auto next_nonempty = [&]() -> std::pair<std::size_t, std::vector<std::string_view>> {
    while (pos < lines.size()) {
      auto toks = split_ws(lines[pos]);
      ++pos;
      if (!toks.empty()) return {pos, toks};
    }
    throw ParseError(pos + 1, "unexpected end of file");
  };

  auto [hdr_line, hdr] = next_nonempty();
  if (hdr.size() != 2 || hdr[0] != "NODES") throw ParseError(hdr_line, "expected 'NODES n'");
  const auto n = parse_int(hdr[1], hdr_line, "node count");
  if (n <= 0) throw ParseError(hdr_line, "node count must be positive");

  std::vector<CpnNode> nodes(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    auto [ln, toks] = next_nonempty();
    if (toks.size() != 2) throw ParseError(ln, "expected 'id cpu'");
    auto id = parse_int(toks[0], ln, "node id");
    auto cpu = parse_int(toks[1], ln, "cpu");
    if (id < 0 || id >= n) throw ParseError(ln, "node id out of range");
    if (seen[static_cast<std::size_t>(id)]) throw ParseError(ln, "duplicate node id");
    if (cpu <= 0) throw ParseError(ln, "cpu capacity must be positive");
    seen[static_cast<std::size_t>(id)] = 1;
    nodes[static_cast<std::size_t>(id)] = {static_cast<NodeId>(id), cpu, cpu};
  }

  auto [links_line, lhdr] = next_nonempty();
  if (lhdr.size() != 2 || lhdr[0] != "LINKS") throw ParseError(links_line, "expected 'LINKS m'");
  const auto m = parse_int(lhdr[1], links_line, "link count");
  if (m < 0) throw ParseError(links_line, "link count must be non-negative");

  std::vector<CpnLink> links;
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::int64_t i = 0; i < m; ++i) {
    auto [ln, toks] = next_nonempty();
    if (toks.size() != 3) throw ParseError(ln, "expected 'u v bw'");
    auto u = parse_int(toks[0], ln, "endpoint");
    auto v = parse_int(toks[1], ln, "endpoint");
    auto bw = parse_int(toks[2], ln, "bandwidth");
    if (u < 0 || u >= n || v < 0 || v >= n) throw ParseError(ln, "link endpoint out of range");
    if (u == v) throw ParseError(ln, "self-loop on node " + std::to_string(u));
    if (bw < 0) throw ParseError(ln, "bandwidth must be non-negative");
    auto key = std::pair{static_cast<NodeId>(std::min(u, v)), static_cast<NodeId>(std::max(u, v))};
    if (!pairs.insert(key).second) throw ParseError(ln, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    links.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), bw, bw});
  }
  while (pos < lines.size()) {
    if (!split_ws(lines[pos]).empty()) throw ParseError(pos + 1, "trailing content after link list");
    ++pos;
  }
  try {
    return CpnTopology(std::move(nodes), std::move(links));
  } catch (const ModelError& e) {
    throw ParseError(links_line, e.what());
  }
}

std::string write_cpn_edge_list(const CpnTopology& topology) {
  std::ostringstream out;
  out << "NODES " << topology.node_count() << "\n";
  for (const auto& n : topology.nodes()) out << n.id << " " << n.cpu_capacity << "\n";
  out << "LINKS " << topology.link_count() << "\n";
  for (const auto& l : topology.links()) out << l.u << " " << l.v << " " << l.bw_capacity << "\n";
  return out.str();
}

CpnTopology import_edge_list(std::string_view text, UnitRange cpu, UnitRange bw, std::uint64_t seed) {
  if (cpu.lo <= 0 || cpu.hi < cpu.lo || bw.lo <= 0 || bw.hi < bw.lo)
    throw ModelError("capacity ranges must be positive intervals");
  std::map<std::string, NodeId> label;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::set<std::pair<NodeId, NodeId>> seen;
  auto lines = lines_of(text);
  auto id_of = [&](std::string_view tok) {
    auto [it, inserted] = label.emplace(std::string(tok), static_cast<NodeId>(label.size()));
    return it->second;
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto toks = split_ws(lines[i]);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks.size() < 2) throw ParseError(i + 1, "expected 'a b [weight]'");
    NodeId a = id_of(toks[0]);
    NodeId b = id_of(toks[1]);
    if (a == b) throw ParseError(i + 1, "self-loop");
    auto key = std::pair{std::min(a, b), std::max(a, b)};
    if (seen.insert(key).second) edges.push_back(key);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Units> cpu_dist(cpu.lo, cpu.hi);
  std::uniform_int_distribution<Units> bw_dist(bw.lo, bw.hi);
  std::vector<CpnNode> nodes;
  for (std::size_t i = 0; i < label.size(); ++i) {
    Units c = cpu_dist(rng);
    nodes.push_back({static_cast<NodeId>(i), c, c});
  }
  std::vector<CpnLink> links;
  for (auto [a, b] : edges) {
    Units w = bw_dist(rng);
    links.push_back({a, b, w, w});
  }
  return CpnTopology(std::move(nodes), std::move(links));
}

nlohmann::json entity_to_json(const ServiceEntity& entity) {
  nlohmann::json sfs = nlohmann::json::array();
  for (const auto& sf : entity.sfs) sfs.push_back({{"id", sf.id}, {"cpu", sf.cpu_demand}});
  nlohmann::json lls = nlohmann::json::array();
  for (const auto& ll : entity.lls)
    lls.push_back({{"u", entity.sfs[static_cast<std::size_t>(ll.u)].id},
                   {"v", entity.sfs[static_cast<std::size_t>(ll.v)].id},
                   {"bw", ll.bw_demand}});
  return {{"id", entity.id},
          {"arrival_time", entity.arrival_time},
          {"lifetime", entity.lifetime},
          {"sfs", std::move(sfs)},
          {"lls", std::move(lls)}};
}

ServiceEntity entity_from_json(const nlohmann::json& j) {
  ServiceEntity e;
  e.id = j.at("id").get<RequestId>();
  e.arrival_time = j.at("arrival_time").get<double>();
  e.lifetime = j.at("lifetime").get<double>();
  std::map<std::int64_t, SfIndex> index;
  for (const auto& sf : j.at("sfs")) {
    auto id = sf.at("id").get<std::int64_t>();
    if (!index.emplace(id, static_cast<SfIndex>(e.sfs.size())).second)
      throw ModelError("duplicate SF id " + std::to_string(id));
    e.sfs.push_back({id, sf.at("cpu").get<Units>()});
  }
  for (const auto& ll : j.at("lls")) {
    auto u = index.find(ll.at("u").get<std::int64_t>());
    auto v = index.find(ll.at("v").get<std::int64_t>());
    if (u == index.end() || v == index.end()) throw ModelError("LL references unknown SF id");
    e.lls.push_back({u->second, v->second, ll.at("bw").get<Units>()});
  }
  validate_entity(e);
  return e;
}

std::string write_workload(const std::vector<ServiceEntity>& workload) {
  std::string out;
  for (const auto& e : workload) {
    out += entity_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<ServiceEntity> load_workload(std::string_view text) {
  std::vector<ServiceEntity> out;
  auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (split_ws(lines[i]).empty()) continue;
    try {
      out.push_back(entity_from_json(nlohmann::json::parse(lines[i])));
    } catch (const std::exception& ex) {
      throw ParseError(i + 1, ex.what());
    }
  }
  return out;
}

nlohmann::json decision_to_json(const MappingDecision& decision) {
  nlohmann::json flows = nlohmann::json::array();
  for (const auto& [ll, path] : decision.flows) flows.push_back({{"ll", ll}, {"path", path.nodes}});
  return {{"entity_id", decision.entity_id}, {"placement", decision.assignment.placement}, {"flows", std::move(flows)}};
}

MappingDecision decision_from_json(const nlohmann::json& j, const CpnTopology& topology) {
  MappingDecision d;
  d.entity_id = j.at("entity_id").get<RequestId>();
  d.assignment.placement = j.at("placement").get<std::vector<NodeId>>();
  for (const auto& f : j.at("flows")) {
    auto nodes = f.at("path").get<std::vector<NodeId>>();
    Path p;
    // Keep unresolvable hops as-is so the validator can name the defect.
    p.nodes = nodes;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      bool in_range = nodes[i] >= 0 && nodes[i + 1] >= 0 &&
                      static_cast<std::size_t>(nodes[i]) < topology.node_count() &&
                      static_cast<std::size_t>(nodes[i + 1]) < topology.node_count();
      auto l = in_range ? topology.find_link(nodes[i], nodes[i + 1]) : std::nullopt;
      p.links.push_back(l ? *l : -1);
    }
    d.flows[f.at("ll").get<LlIndex>()] = std::move(p);
  }
  return d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace sem
