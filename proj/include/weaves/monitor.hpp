#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/runtime.hpp"

namespace weaves {

/// summary, beads, weaves, strings, classes, checkpoints, islands.
const std::vector<std::string>& monitor_queries();

/// Read-only report as `key=value` lines in a fixed field order. Must be
/// called on the control path. Throws UnknownQuery.
std::string monitor_query(const Runtime& rt, std::string_view query);

/// Parses a reconfiguration request:
///   add_bead <module> <label>
///   add_weave <label> <bead>...
///   spawn_string <weave> <entry>
///   rebind <weave> <function> <module> <replacement>
///   share_tuple <symbol>[,<symbol>...] <bead>...
/// Returns nullopt for anything else; throws InvalidArgument on a known
/// verb with the wrong arity.
std::optional<Command> parse_monitor_command(std::string_view line);

/// Answers one request line: a query name, or a command, which is queued
/// for the next dispatch boundary. The response ends with a blank line.
std::string monitor_respond(Runtime& rt, std::string_view line);

/// Line protocol over streams until end of input or `quit`.
void serve_monitor(Runtime& rt, std::istream& in, std::ostream& out);

}  // namespace weaves
