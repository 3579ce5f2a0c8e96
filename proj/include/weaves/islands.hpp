#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "weaves/ids.hpp"

namespace weaves {

class Runtime;

/// A closed set of beads with the weaves over them and the strings running
/// in those weaves: the unit of migration.
struct Island {
  std::set<BeadId> beads;
  std::set<WeaveId> weaves;
  std::set<StringId> strings;
};

/// Closed components of the bead graph whose edges are weave co-membership,
/// tuple-merged cells and address-valued words (any aligned 8-byte word of a
/// cell equal to the start of a live allocation of another bead). With
/// hints, each hinted bead set is validated and completed instead. Throws
/// NotClosed naming the violating edge.
std::vector<Island> identify_islands(const Runtime& rt, const std::vector<std::set<BeadId>>& hints = {});

struct MigrationResult {
  std::map<BeadId, BeadId> beads;
  std::map<WeaveId, WeaveId> weaves;
  std::map<StringId, StringId> strings;
  std::uint64_t bytes = 0;
};

/// Moves an island's cells, allocations, weaves, bindings and strings from
/// `src` to `dst`, keeping every abstract address. Source strings become
/// Detached. Throws NotClosed, MissingModule, RegionOverflow.
MigrationResult migrate_island(Runtime& src, Runtime& dst, const Island& island);

}  // namespace weaves
