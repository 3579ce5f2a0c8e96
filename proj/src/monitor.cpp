#include "weaves/monitor.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "weaves/error.hpp"
#include "weaves/islands.hpp"
#include "weaves/scheduler.hpp"

namespace weaves {

const std::vector<std::string>& monitor_queries() {
  static const std::vector<std::string> q = {"summary", "beads",       "weaves", "strings",
                                             "classes", "checkpoints", "islands"};
  return q;
}

namespace {

template <class T, class F>
std::string joined(const T& items, F&& f) {
  std::string out;
  for (const auto& x : items) {
    if (!out.empty()) out += ',';
    out += f(x);
  }
  return out.empty() ? "-" : out;
}

std::string bead_label(const Runtime& rt, BeadId b) { return rt.tapestry().bead(b).label; }
std::string weave_label(const Runtime& rt, WeaveId w) { return rt.tapestry().weave(w).label; }

}  // namespace

std::string monitor_query(const Runtime& rt, std::string_view query) {
  if (rt.in_step()) throw Error(ErrorCode::ScopeMidStep, "monitor queries run between steps");
  const Tapestry& t = rt.tapestry();
  std::ostringstream os;
  if (query == "summary") {
    std::size_t live_beads = 0;
    for (const auto& b : t.beads()) live_beads += b.live;
    std::size_t live = 0;
    std::size_t finished = 0;
    std::size_t failed = 0;
    for (const auto& s : t.strings()) {
      live += s.live();
      finished += s.state.status == StringStatus::Finished;
      failed += s.state.status == StringStatus::Failed;
    }
    os << "modules=" << t.modules().size() << "\nbeads=" << live_beads << "\nweaves=" << t.weaves().size()
       << "\nstrings=" << t.strings().size() << "\nlive=" << live << "\nfinished=" << finished
       << "\nfailed=" << failed << "\nclasses=" << compute_equivalence_classes(t).classes.size()
       << "\ncheckpoints=" << rt.checkpoints().live_ids().size() << "\nsteps=" << rt.total_steps()
       << "\nnode=" << rt.memory().region().node().value << '\n';
  } else if (query == "beads") {
    for (const auto& b : t.beads()) {
      if (!b.live) continue;
      os << "bead id=" << b.id.value << " label=" << b.label << " module=" << t.module(b.module).def.name
         << " cells=" << b.context.size() << '\n';
    }
  } else if (query == "weaves") {
    for (const auto& w : t.weaves())
      os << "weave id=" << w.id.value << " label=" << w.label
         << " beads=" << joined(w.beads, [&](BeadId b) { return bead_label(rt, b); }) << '\n';
  } else if (query == "strings") {
    for (const auto& s : t.strings())
      os << "string id=" << s.id.value << " weave=" << weave_label(rt, s.weave) << " entry=" << s.entry
         << " status=" << to_string(s.state.status) << " steps=" << s.steps << '\n';
  } else if (query == "classes") {
    auto classes = compute_equivalence_classes(t);
    for (std::size_t i = 0; i < classes.classes.size(); ++i)
      os << "class id=" << i
         << " strings=" << joined(classes.classes[i], [](StringId s) { return std::to_string(s.value); }) << '\n';
  } else if (query == "checkpoints") {
    for (CheckpointId id : rt.checkpoints().live_ids()) {
      const Checkpoint& c = rt.checkpoints().get(id);
      os << "checkpoint id=" << id.value
         << " scope=" << (c.scope.whole() ? std::string("tapestry") : "string:" + std::to_string(c.scope.string.value))
         << " mode=" << (c.mode == CheckpointMode::Cow ? "cow" : "naive") << " log=" << c.log_size() << '\n';
    }
  } else if (query == "islands") {
    auto islands = identify_islands(rt);
    for (std::size_t i = 0; i < islands.size(); ++i) {
      const Island& is = islands[i];
      os << "island id=" << i << " node=" << rt.memory().region().node().value
         << " beads=" << joined(is.beads, [&](BeadId b) { return bead_label(rt, b); })
         << " weaves=" << joined(is.weaves, [&](WeaveId w) { return weave_label(rt, w); })
         << " strings=" << joined(is.strings, [](StringId s) { return std::to_string(s.value); }) << '\n';
    }
  } else {
    throw Error(ErrorCode::UnknownQuery, "'" + std::string(query) + "'");
  }
  return os.str();
}

std::optional<Command> parse_monitor_command(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::vector<std::string> w;
  for (std::string tok; is >> tok;) w.push_back(tok);
  if (w.empty()) return std::nullopt;
  auto arity = [&](bool ok) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, "wrong number of arguments to '" + w[0] + "'");
  };
  if (w[0] == "add_bead") {
    arity(w.size() == 3);
    return command::AddBead{w[1], w[2]};
  }
  if (w[0] == "add_weave") {
    arity(w.size() >= 3);
    return command::AddWeave{{w.begin() + 2, w.end()}, w[1]};
  }
  if (w[0] == "spawn_string") {
    arity(w.size() == 3);
    return command::SpawnString{w[1], w[2]};
  }
  if (w[0] == "rebind") {
    arity(w.size() == 5);
    return command::Rebind{w[1], w[2], w[3], w[4]};
  }
  if (w[0] == "share_tuple") {
    arity(w.size() >= 3);
    command::ShareTuple c;
    std::istringstream syms(w[1]);
    for (std::string s; std::getline(syms, s, ',');)
      if (!s.empty()) c.symbols.push_back(s);
    c.beads.assign(w.begin() + 2, w.end());
    return c;
  }
  return std::nullopt;
}

std::string monitor_respond(Runtime& rt, std::string_view line) {
  try {
    if (auto cmd = parse_monitor_command(line)) {
      rt.submit(std::move(*cmd));
      return "ok=queued\n\n";
    }
    return monitor_query(rt, line) + "\n";
  } catch (const Error& e) {
    return std::string("error=") + e.what() + "\n\n";
  }
}

void serve_monitor(Runtime& rt, std::istream& in, std::ostream& out) {
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (line == "quit") break;
    out << monitor_respond(rt, line) << std::flush;
  }
}

}  // namespace weaves
