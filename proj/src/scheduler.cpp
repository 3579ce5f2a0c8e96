#include "weaves/scheduler.hpp"

#include <numeric>
#include <ostream>
#include <sstream>

#include "weaves/error.hpp"

namespace weaves {

namespace {
struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;  // root is always the smallest member
  }
};
}  // namespace

EquivalenceClasses compute_equivalence_classes(const Tapestry& tapestry) {
  EquivalenceClasses out;
  const auto& strings = tapestry.strings();
  out.class_of.assign(strings.size(), EquivalenceClasses::kNone);
  out.bead_users.assign(tapestry.beads().size(), 0);

  UnionFind uf(strings.size());
  std::vector<std::uint32_t> first_user(tapestry.beads().size(), EquivalenceClasses::kNone);
  for (const auto& s : strings) {
    if (!s.live()) continue;
    for (BeadId b : tapestry.weave(s.weave).beads) {
      ++out.bead_users[b.index()];
      auto& first = first_user[b.index()];
      if (first == EquivalenceClasses::kNone)
        first = s.id.value;
      else
        uf.unite(first, s.id.value);
    }
  }
  std::vector<std::uint32_t> class_of_root(strings.size(), EquivalenceClasses::kNone);
  for (const auto& s : strings) {
    if (!s.live()) continue;
    std::uint32_t root = uf.find(s.id.value);
    auto& k = class_of_root[root];
    if (k == EquivalenceClasses::kNone) {
      k = static_cast<std::uint32_t>(out.classes.size());
      out.classes.emplace_back();
    }
    out.classes[k].push_back(s.id);
    out.class_of[s.id.index()] = k;
  }
  return out;
}

std::string_view to_string(SchedulingPolicy p) {
  return p == SchedulingPolicy::RoundRobinClasses ? "round_robin_classes" : "seeded_random";
}

SchedulingPolicy parse_policy(std::string_view text) {
  if (text == "round_robin_classes") return SchedulingPolicy::RoundRobinClasses;
  if (text == "seeded_random") return SchedulingPolicy::SeededRandom;
  throw Error(ErrorCode::InvalidArgument, "unknown scheduling policy '" + std::string(text) + "'");
}

std::string format_trace_line(const TraceEvent& e) {
  std::ostringstream os;
  os << "step=" << e.step << " event=" << e.event << " string=" << e.string << " class=";
  if (e.klass == EquivalenceClasses::kNone)
    os << '-';
  else
    os << e.klass;
  os << " reason=" << (e.reason.empty() ? "-" : e.reason);
  return os.str();
}

void write_trace(std::ostream& os, const std::vector<TraceEvent>& trace) {
  for (const auto& e : trace) os << format_trace_line(e) << '\n';
}

}  // namespace weaves
