#pragma once

// Text formats: topology files, raw edge lists, JSON-lines workloads and
// decision records.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sem/generate.hpp"
#include "sem/model.hpp"

namespace sem {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the topology file format:
///   NODES n
///   <id> <cpu>          (n lines)
///   LINKS m
///   <u> <v> <bw>        (m lines)
/// Availability starts at capacity. Structural problems (self-loops,
/// duplicates, disconnection) are reported as ParseError with a line number.
CpnTopology load_cpn_edge_list(std::string_view text);

/// Writes capacities (not current availability) in the format above.
std::string write_cpn_edge_list(const CpnTopology& topology);

/// Imports a raw "a b [weight]" edge list (e.g. a Rocketfuel weights file),
/// relabelling nodes densely in order of first appearance, collapsing
/// duplicate and reversed edges, and drawing capacities uniformly.
CpnTopology import_edge_list(std::string_view text, UnitRange cpu, UnitRange bw, std::uint64_t seed);

nlohmann::json entity_to_json(const ServiceEntity& entity);
ServiceEntity entity_from_json(const nlohmann::json& j);

std::string write_workload(const std::vector<ServiceEntity>& workload);
std::vector<ServiceEntity> load_workload(std::string_view text);

nlohmann::json decision_to_json(const MappingDecision& decision);
MappingDecision decision_from_json(const nlohmann::json& j, const CpnTopology& topology);

/// Throw IoError when the file cannot be opened, read or written.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace sem
