#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weaves/grid.hpp"
#include "weaves/runtime.hpp"

namespace weaves {

// Tapestry configuration, format `weaves-config v1`. The grammar is
// documented in docs/config.md. Every declaration records the line it
// started on for diagnostics.

struct ModuleDecl {
  std::string name;
  std::string from;  // catalog module to start from, if any
  std::vector<std::pair<std::string, std::string>> globals;    // symbol, literal
  std::vector<std::pair<std::string, std::string>> entries;    // entry name, catalog program
  std::vector<std::pair<std::string, std::string>> functions;  // exported name, catalog function
  std::size_t line = 0;
};

struct BeadDecl {
  std::string label;
  std::string module;
  std::uint32_t rank = 0;
  std::vector<std::pair<std::string, std::string>> sets;  // symbol, literal
  std::size_t line = 0;
};

struct WeaveDecl {
  std::string label;
  std::vector<std::string> beads;
  std::size_t line = 0;
};

struct StringDecl {
  std::string weave;
  std::string entry;
  std::size_t line = 0;
};

struct TupleDecl {
  std::vector<std::string> symbols;
  std::vector<std::string> beads;
  std::size_t line = 0;
};

struct GridDecl {
  std::uint32_t ranks = 2;
  std::uint32_t nodes = 0;
  unsigned total_bits = 64;
  unsigned vm_bits = 40;
  std::uint32_t steps_per_tick = 16;
  NetworkConfig network;
  bool connect_all = true;
  std::size_t line = 0;
};

struct EventDecl {
  GridEvent event;
  std::size_t line = 0;
};

struct TapestryConfig {
  std::vector<ModuleDecl> modules;
  std::vector<BeadDecl> beads;
  std::vector<WeaveDecl> weaves;
  std::vector<StringDecl> strings;
  std::vector<TupleDecl> tuples;
  std::optional<GridDecl> grid;
  std::vector<EventDecl> events;

  const ModuleDecl* module(std::string_view name) const;
  const BeadDecl* bead(std::string_view label) const;
  const WeaveDecl* weave(std::string_view label) const;
  /// Rank a weave lives on: that of its first bead.
  std::uint32_t weave_rank(const WeaveDecl& w) const;
};

/// Parses and validates. Throws ParseError (line, column, expected) for
/// syntax, UnresolvedReference for names that are not declared, and
/// InvalidDefinition for duplicates and rank mismatches.
TapestryConfig parse_tapestry_config(std::string_view text);
TapestryConfig load_tapestry_config(const std::string& path);

/// Canonical text: fixed section and key order, single spaces.
std::string serialize_tapestry_config(const TapestryConfig& config);

/// Module definition with catalog code attached.
ModuleDef make_module(const ModuleDecl& decl);

struct BuiltTapestry {
  std::map<std::string, BeadId> beads;
  std::map<std::string, WeaveId> weaves;
  std::vector<StringId> strings;
};

/// Registers every module and instantiates the declarations placed on
/// `rank`: beads (with their overrides), tuples, weaves, strings.
BuiltTapestry build_tapestry(Runtime& rt, const TapestryConfig& config, std::uint32_t rank = 0);

/// Grid configuration from the [grid] section (defaults when absent).
GridConfig grid_config(const TapestryConfig& config, const SchedulerConfig& scheduler = {});
/// Builds every rank and schedules the events.
std::unique_ptr<Grid> build_grid(const TapestryConfig& config, const SchedulerConfig& scheduler = {});

}  // namespace weaves
