#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/ids.hpp"
#include "weaves/tapestry.hpp"

namespace weaves {

/// Partition of the live strings: two strings share a class iff they are
/// connected by the transitive closure of "their weaves share a bead".
struct EquivalenceClasses {
  std::vector<std::vector<StringId>> classes;  // each sorted; classes ordered by first member
  std::vector<std::uint32_t> class_of;         // indexed by string id; kNone for dead strings
  std::vector<std::uint32_t> bead_users;       // indexed by bead id: live strings whose weave holds it

  static constexpr std::uint32_t kNone = 0xFFFFFFFF;

  std::uint32_t of(StringId s) const { return s.index() < class_of.size() ? class_of[s.index()] : kNone; }
  bool shared(BeadId b) const { return b.index() < bead_users.size() && bead_users[b.index()] >= 2; }
};

EquivalenceClasses compute_equivalence_classes(const Tapestry& tapestry);

enum class SchedulingPolicy { RoundRobinClasses, SeededRandom };

std::string_view to_string(SchedulingPolicy p);
SchedulingPolicy parse_policy(std::string_view text);

struct SchedulerConfig {
  SchedulingPolicy policy = SchedulingPolicy::RoundRobinClasses;
  std::uint64_t seed = 1;
  std::uint32_t quantum = 64;
  bool record_trace = true;
};

struct TraceEvent {
  std::uint64_t step = 0;
  std::string event;
  StringId string;
  std::uint32_t klass = EquivalenceClasses::kNone;
  std::string reason;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// `step=<n> event=<e> string=<id> class=<id> reason=<r>`
std::string format_trace_line(const TraceEvent& e);
void write_trace(std::ostream& os, const std::vector<TraceEvent>& trace);

}  // namespace weaves
