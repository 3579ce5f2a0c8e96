#include "weaves/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "weaves/catalog.hpp"
#include "weaves/error.hpp"
#include "weaves/value.hpp"

namespace weaves {

const ModuleDecl* TapestryConfig::module(std::string_view name) const {
  for (const auto& m : modules)
    if (m.name == name) return &m;
  return nullptr;
}

const BeadDecl* TapestryConfig::bead(std::string_view label) const {
  for (const auto& b : beads)
    if (b.label == label) return &b;
  return nullptr;
}

const WeaveDecl* TapestryConfig::weave(std::string_view label) const {
  for (const auto& w : weaves)
    if (w.label == label) return &w;
  return nullptr;
}

std::uint32_t TapestryConfig::weave_rank(const WeaveDecl& w) const {
  const BeadDecl* b = w.beads.empty() ? nullptr : bead(w.beads.front());
  return b ? b->rank : 0;
}

namespace {

constexpr std::string_view kHeader = "weaves-config v1";

struct Token {
  std::string text;
  std::size_t column = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view s, std::size_t base_column) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(Token{std::string(s.substr(i, j - i)), base_column + i});
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// One `key = value` line.
struct Entry {
  std::size_t line = 0;
  std::size_t key_column = 0;
  std::string key;
  std::string_view raw;      // value text, trimmed
  std::size_t value_column = 0;
  std::vector<Token> tokens;  // value split on whitespace
};

template <class T>
T parse_number(const Entry& e, const char* what) {
  if (e.tokens.size() != 1) throw ParseError(e.line, e.value_column, what);
  const std::string& s = e.tokens[0].text;
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(e.line, e.tokens[0].column, what);
  return v;
}

const std::string& single(const Entry& e) {
  if (e.tokens.size() != 1) throw ParseError(e.line, e.tokens.size() > 1 ? e.tokens[1].column : e.value_column, "one name");
  return e.tokens[0].text;
}

std::vector<std::string> names(const Entry& e) {
  if (e.tokens.empty()) throw ParseError(e.line, e.value_column, "at least one name");
  std::vector<std::string> out;
  for (const auto& t : e.tokens) out.push_back(t.text);
  return out;
}

/// `<name> <rest of line>`.
std::pair<std::string, std::string> name_and_rest(const Entry& e, const char* what) {
  if (e.tokens.size() < 2) throw ParseError(e.line, e.value_column + e.raw.size(), what);
  const std::string& first = e.tokens[0].text;
  std::string rest(trim(e.raw.substr(first.size())));
  return {first, rest};
}

std::string checked_literal(const Entry& e, std::string literal, std::size_t column) {
  try {
    (void)value::parse_literal(literal);
  } catch (const Error&) {
    throw ParseError(e.line, column, "a literal such as i64:5, f64:0.5, f64[]:1,2, str:text, zeros:8");
  }
  return literal;
}

std::string literal_of(const Entry& e) {
  auto [name, rest] = name_and_rest(e, "a symbol and a literal");
  return checked_literal(e, rest, e.tokens[1].column);
}

class Parser {
 public:
  TapestryConfig run(std::string_view text) {
    std::size_t line_no = 0;
    bool header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      std::string_view line = trim(raw);
      const std::size_t indent = static_cast<std::size_t>(line.data() - raw.data()) + 1;
      if (line.empty() || line.front() == '#') continue;
      if (!header) {
        if (line != kHeader) throw ParseError(line_no, indent, "header 'weaves-config v1'");
        header = true;
        continue;
      }
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError(line_no, indent + line.size(), "']'");
        finish_section();
        begin_section(std::string(trim(line.substr(1, line.size() - 2))), line_no, indent + 1);
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, indent, "'key = value' or '[section]'");
      if (section_.empty()) throw ParseError(line_no, indent, "a [section] header before keys");
      Entry e;
      e.line = line_no;
      e.key_column = indent;
      e.key = std::string(trim(line.substr(0, eq)));
      if (e.key.empty()) throw ParseError(line_no, indent, "a key before '='");
      std::string_view rest = line.substr(eq + 1);
      std::string_view value = trim(rest);
      e.value_column = indent + eq + 1 + static_cast<std::size_t>(value.data() - rest.data());
      e.raw = value;
      e.tokens = tokenize(value, e.value_column);
      entry(e);
    }
    finish_section();
    if (cfg_.modules.empty()) throw ParseError(line_no == 0 ? 1 : line_no, 1, "at least one [module] section");
    return std::move(cfg_);
  }

 private:
  void begin_section(std::string name, std::size_t line, std::size_t column) {
    static const std::set<std::string> known = {"module", "bead", "weave", "string", "tuple", "grid", "event"};
    if (!known.count(name))
      throw ParseError(line, column, "a section name (module, bead, weave, string, tuple, grid, event)");
    section_ = std::move(name);
    section_line_ = line;
    seen_.clear();
    if (section_ == "module") cfg_.modules.emplace_back().line = line;
    if (section_ == "bead") cfg_.beads.emplace_back().line = line;
    if (section_ == "weave") cfg_.weaves.emplace_back().line = line;
    if (section_ == "string") cfg_.strings.emplace_back().line = line;
    if (section_ == "tuple") cfg_.tuples.emplace_back().line = line;
    if (section_ == "grid") {
      if (cfg_.grid) throw ParseError(line, column, "at most one [grid] section");
      cfg_.grid.emplace().line = line;
    }
    if (section_ == "event") cfg_.events.emplace_back().line = line;
  }

  void require(std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (!seen_.count(k)) throw ParseError(section_line_, 1, std::string("key '") + k + "' in [" + section_ + "]");
  }

  void finish_section() {
    if (section_ == "module") require({"name"});
    if (section_ == "bead") require({"label", "module"});
    if (section_ == "weave") require({"label", "beads"});
    if (section_ == "string") require({"weave", "entry"});
    if (section_ == "tuple") require({"symbols", "beads"});
    if (section_ == "event") require({"tick", "kind"});
    section_.clear();
  }

  void once(const Entry& e) {
    if (!seen_.insert(e.key).second) throw ParseError(e.line, e.key_column, "no repeated '" + e.key + "'");
  }

  [[noreturn]] void unknown(const Entry& e, const char* keys) {
    throw ParseError(e.line, e.key_column, std::string("one of the keys ") + keys);
  }

  void entry(const Entry& e) {
    const bool repeatable = e.key == "global" || e.key == "entry" || e.key == "function" || e.key == "set";
    if (!(repeatable && section_ != "string")) once(e);
    if (section_ == "module") return module_entry(e);
    if (section_ == "bead") return bead_entry(e);
    if (section_ == "weave") return weave_entry(e);
    if (section_ == "string") return string_entry(e);
    if (section_ == "tuple") return tuple_entry(e);
    if (section_ == "grid") return grid_entry(e);
    return event_entry(e);
  }

  void module_entry(const Entry& e) {
    ModuleDecl& m = cfg_.modules.back();
    if (e.key == "name") m.name = single(e);
    else if (e.key == "from") m.from = single(e);
    else if (e.key == "global") m.globals.emplace_back(e.tokens.empty() ? "" : e.tokens[0].text, literal_of(e));
    else if (e.key == "entry" || e.key == "function") {
      if (e.tokens.size() != 2) throw ParseError(e.line, e.value_column, "a name and a catalog name");
      auto& list = e.key == "entry" ? m.entries : m.functions;
      list.emplace_back(e.tokens[0].text, e.tokens[1].text);
    } else unknown(e, "name, from, global, entry, function");
  }

  void bead_entry(const Entry& e) {
    BeadDecl& b = cfg_.beads.back();
    if (e.key == "label") b.label = single(e);
    else if (e.key == "module") b.module = single(e);
    else if (e.key == "rank") b.rank = parse_number<std::uint32_t>(e, "a rank number");
    else if (e.key == "set") b.sets.emplace_back(e.tokens.empty() ? "" : e.tokens[0].text, literal_of(e));
    else unknown(e, "label, module, rank, set");
  }

  void weave_entry(const Entry& e) {
    WeaveDecl& w = cfg_.weaves.back();
    if (e.key == "label") w.label = single(e);
    else if (e.key == "beads") w.beads = names(e);
    else unknown(e, "label, beads");
  }

  void string_entry(const Entry& e) {
    StringDecl& s = cfg_.strings.back();
    if (e.key == "weave") s.weave = single(e);
    else if (e.key == "entry") s.entry = single(e);
    else unknown(e, "weave, entry");
  }

  void tuple_entry(const Entry& e) {
    TupleDecl& t = cfg_.tuples.back();
    if (e.key == "symbols") t.symbols = names(e);
    else if (e.key == "beads") t.beads = names(e);
    else unknown(e, "symbols, beads");
  }

  void grid_entry(const Entry& e) {
    GridDecl& g = *cfg_.grid;
    if (e.key == "ranks") g.ranks = parse_number<std::uint32_t>(e, "a rank count");
    else if (e.key == "nodes") g.nodes = parse_number<std::uint32_t>(e, "a node count");
    else if (e.key == "total_bits") g.total_bits = parse_number<unsigned>(e, "a bit count");
    else if (e.key == "vm_bits") g.vm_bits = parse_number<unsigned>(e, "a bit count");
    else if (e.key == "steps_per_tick") g.steps_per_tick = parse_number<std::uint32_t>(e, "a step count");
    else if (e.key == "loss") g.network.loss = parse_number<double>(e, "a probability");
    else if (e.key == "duplicate") g.network.duplicate = parse_number<double>(e, "a probability");
    else if (e.key == "min_delay") g.network.min_delay = parse_number<std::uint32_t>(e, "a tick count");
    else if (e.key == "max_delay") g.network.max_delay = parse_number<std::uint32_t>(e, "a tick count");
    else if (e.key == "retransmit") g.network.retransmit_interval = parse_number<std::uint32_t>(e, "a tick count");
    else if (e.key == "window") g.network.window = parse_number<std::uint32_t>(e, "a packet count");
    else if (e.key == "seed") g.network.seed = parse_number<std::uint64_t>(e, "a seed");
    else if (e.key == "connect") {
      const std::string& v = single(e);
      if (v != "all" && v != "none") throw ParseError(e.line, e.value_column, "'all' or 'none'");
      g.connect_all = v == "all";
    } else
      unknown(e, "ranks, nodes, total_bits, vm_bits, steps_per_tick, loss, duplicate, min_delay, max_delay, "
                 "retransmit, window, seed, connect");
  }

  void event_entry(const Entry& e) {
    GridEvent& ev = cfg_.events.back().event;
    if (e.key == "tick") ev.tick = parse_number<std::uint64_t>(e, "a tick");
    else if (e.key == "kind") {
      const std::string& k = single(e);
      if (k == "checkpoint") ev.kind = GridEvent::Kind::Checkpoint;
      else if (k == "restore") ev.kind = GridEvent::Kind::Restore;
      else if (k == "migrate") ev.kind = GridEvent::Kind::Migrate;
      else if (k == "kill") ev.kind = GridEvent::Kind::Kill;
      else throw ParseError(e.line, e.value_column, "checkpoint, restore, migrate or kill");
    } else if (e.key == "node") ev.node = NodeId{parse_number<std::uint32_t>(e, "a node number")};
    else if (e.key == "from") ev.from_rank = parse_number<std::uint32_t>(e, "a rank number");
    else if (e.key == "to") ev.to_rank = parse_number<std::uint32_t>(e, "a rank number");
    else if (e.key == "beads") ev.beads = names(e);
    else if (e.key == "remap") {
      for (const auto& t : e.tokens) {
        auto colon = t.text.find(':');
        std::uint32_t r = 0;
        std::uint32_t n = 0;
        const char* s = t.text.data();
        auto a = std::from_chars(s, s + (colon == std::string::npos ? 0 : colon), r);
        auto b = std::from_chars(s + colon + 1, s + t.text.size(), n);
        if (colon == std::string::npos || a.ec != std::errc{} || a.ptr != s + colon || b.ec != std::errc{} ||
            b.ptr != s + t.text.size())
          throw ParseError(e.line, t.column, "rank:node");
        ev.remap[r] = NodeId{n};
      }
    } else
      unknown(e, "tick, kind, node, from, to, beads, remap");
  }

  TapestryConfig cfg_;
  std::string section_;
  std::size_t section_line_ = 0;
  std::set<std::string> seen_;
};

[[noreturn]] void unresolved(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::UnresolvedReference, "line " + std::to_string(line) + ": " + what);
}

void validate(const TapestryConfig& c) {
  std::set<std::string> seen;
  std::map<std::string, ModuleDef> defs;
  for (const auto& m : c.modules) {
    if (!seen.insert(m.name).second)
      throw Error(ErrorCode::InvalidDefinition, "line " + std::to_string(m.line) + ": module '" + m.name + "' twice");
    if (!m.from.empty() && !catalog_module(m.from)) unresolved(m.line, "no catalog module '" + m.from + "'");
    for (const auto& [n, prog] : m.entries)
      if (!catalog_program(prog)) unresolved(m.line, "no catalog program '" + prog + "'");
    for (const auto& [n, fn] : m.functions)
      if (!catalog_function(fn)) unresolved(m.line, "no catalog function '" + fn + "'");
    defs.emplace(m.name, make_module(m));
  }
  auto has_global = [](const ModuleDef& d, const std::string& s) {
    for (const auto& g : d.globals)
      if (g.name == s) return true;
    return false;
  };
  const std::uint32_t ranks = c.grid ? c.grid->ranks : 1;
  seen.clear();
  for (const auto& b : c.beads) {
    if (!seen.insert(b.label).second)
      throw Error(ErrorCode::InvalidDefinition, "line " + std::to_string(b.line) + ": bead '" + b.label + "' twice");
    auto it = defs.find(b.module);
    if (it == defs.end()) unresolved(b.line, "no module '" + b.module + "'");
    for (const auto& [sym, lit] : b.sets)
      if (!has_global(it->second, sym)) unresolved(b.line, "module '" + b.module + "' has no global '" + sym + "'");
    if (b.rank >= ranks)
      throw Error(ErrorCode::InvalidDefinition, "line " + std::to_string(b.line) + ": rank " +
                                                    std::to_string(b.rank) + " outside the grid");
  }
  seen.clear();
  for (const auto& w : c.weaves) {
    if (!seen.insert(w.label).second)
      throw Error(ErrorCode::InvalidDefinition, "line " + std::to_string(w.line) + ": weave '" + w.label + "' twice");
    for (const auto& l : w.beads) {
      const BeadDecl* b = c.bead(l);
      if (!b) unresolved(w.line, "no bead '" + l + "'");
      if (b->rank != c.weave_rank(w))
        throw Error(ErrorCode::InvalidDefinition, "line " + std::to_string(w.line) + ": weave '" + w.label +
                                                      "' spans ranks");
    }
  }
  for (const auto& s : c.strings) {
    const WeaveDecl* w = c.weave(s.weave);
    if (!w) unresolved(s.line, "no weave '" + s.weave + "'");
    bool found = false;
    for (const auto& l : w->beads)
      for (const auto& e : defs.at(c.bead(l)->module).entries) found = found || e.name == s.entry;
    if (!found) unresolved(s.line, "no entry '" + s.entry + "' in weave '" + s.weave + "'");
  }
  for (const auto& t : c.tuples)
    for (const auto& l : t.beads) {
      const BeadDecl* b = c.bead(l);
      if (!b) unresolved(t.line, "no bead '" + l + "'");
      for (const auto& sym : t.symbols)
        if (!has_global(defs.at(b->module), sym)) unresolved(t.line, "bead '" + l + "' has no global '" + sym + "'");
      if (b->rank != c.bead(t.beads.front())->rank)
        throw Error(ErrorCode::InvalidDefinition, "line " + std::to_string(t.line) + ": tuple spans ranks");
    }
  for (const auto& e : c.events) {
    if (!c.grid) unresolved(e.line, "events need a [grid] section");
    for (const auto& l : e.event.beads)
      if (!c.bead(l)) unresolved(e.line, "no bead '" + l + "'");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

}  // namespace

TapestryConfig parse_tapestry_config(std::string_view text) {
  TapestryConfig c = Parser().run(text);
  validate(c);
  return c;
}

TapestryConfig load_tapestry_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tapestry_config(ss.str());
}

std::string serialize_tapestry_config(const TapestryConfig& c) {
  std::ostringstream os;
  os << kHeader << '\n';
  for (const auto& m : c.modules) {
    os << "\n[module]\nname = " << m.name << '\n';
    if (!m.from.empty()) os << "from = " << m.from << '\n';
    for (const auto& [s, l] : m.globals) os << "global = " << s << ' ' << l << '\n';
    for (const auto& [n, p] : m.entries) os << "entry = " << n << ' ' << p << '\n';
    for (const auto& [n, f] : m.functions) os << "function = " << n << ' ' << f << '\n';
  }
  for (const auto& b : c.beads) {
    os << "\n[bead]\nlabel = " << b.label << "\nmodule = " << b.module << '\n';
    if (b.rank != 0) os << "rank = " << b.rank << '\n';
    for (const auto& [s, l] : b.sets) os << "set = " << s << ' ' << l << '\n';
  }
  for (const auto& w : c.weaves) os << "\n[weave]\nlabel = " << w.label << "\nbeads = " << join(w.beads) << '\n';
  for (const auto& s : c.strings) os << "\n[string]\nweave = " << s.weave << "\nentry = " << s.entry << '\n';
  for (const auto& t : c.tuples)
    os << "\n[tuple]\nsymbols = " << join(t.symbols) << "\nbeads = " << join(t.beads) << '\n';
  if (c.grid) {
    const GridDecl& g = *c.grid;
    os << "\n[grid]\nranks = " << g.ranks << "\nnodes = " << g.nodes << "\ntotal_bits = " << g.total_bits
       << "\nvm_bits = " << g.vm_bits << "\nsteps_per_tick = " << g.steps_per_tick
       << "\nloss = " << format_double(g.network.loss) << "\nduplicate = " << format_double(g.network.duplicate)
       << "\nmin_delay = " << g.network.min_delay << "\nmax_delay = " << g.network.max_delay
       << "\nretransmit = " << g.network.retransmit_interval << "\nwindow = " << g.network.window
       << "\nseed = " << g.network.seed << "\nconnect = " << (g.connect_all ? "all" : "none") << '\n';
  }
  for (const auto& ed : c.events) {
    const GridEvent& e = ed.event;
    os << "\n[event]\ntick = " << e.tick << "\nkind = " << to_string(e.kind) << '\n';
    switch (e.kind) {
      case GridEvent::Kind::Kill: os << "node = " << e.node.value << '\n'; break;
      case GridEvent::Kind::Migrate:
        os << "from = " << e.from_rank << "\nto = " << e.to_rank << '\n';
        if (!e.beads.empty()) os << "beads = " << join(e.beads) << '\n';
        break;
      case GridEvent::Kind::Restore:
        if (!e.remap.empty()) {
          os << "remap =";
          for (const auto& [r, n] : e.remap) os << ' ' << r << ':' << n.value;
          os << '\n';
        }
        break;
      case GridEvent::Kind::Checkpoint: break;
    }
  }
  return os.str();
}

ModuleDef make_module(const ModuleDecl& decl) {
  ModuleDef def;
  if (!decl.from.empty()) {
    auto base = catalog_module(decl.from);
    if (!base) throw Error(ErrorCode::UnresolvedReference, "no catalog module '" + decl.from + "'");
    def = std::move(*base);
  }
  def.name = decl.name;
  for (const auto& [sym, lit] : decl.globals) {
    Bytes initial = value::parse_literal(lit);
    bool replaced = false;
    for (auto& g : def.globals)
      if (g.name == sym) {
        g.initial = initial;
        replaced = true;
      }
    if (!replaced) def.globals.push_back(GlobalDecl{sym, std::move(initial)});
  }
  for (const auto& [name, prog] : decl.entries) {
    auto p = catalog_program(prog);
    if (!p) throw Error(ErrorCode::UnresolvedReference, "no catalog program '" + prog + "'");
    std::erase_if(def.entries, [&](const EntryPoint& e) { return e.name == name; });
    def.entries.push_back(EntryPoint{name, std::move(*p)});
  }
  for (const auto& [name, fn] : decl.functions) {
    auto f = catalog_function(fn);
    if (!f) throw Error(ErrorCode::UnresolvedReference, "no catalog function '" + fn + "'");
    f->name = name;
    std::erase_if(def.functions, [&](const FunctionDef& d) { return d.name == name; });
    def.functions.push_back(std::move(*f));
  }
  return def;
}

BuiltTapestry build_tapestry(Runtime& rt, const TapestryConfig& c, std::uint32_t rank) {
  BuiltTapestry out;
  for (const auto& m : c.modules)
    if (!rt.tapestry().find_module(m.name)) rt.register_module(make_module(m));
  for (const auto& b : c.beads) {
    if (b.rank != rank) continue;
    BeadId id = rt.instantiate_bead(b.module, b.label);
    for (const auto& [sym, lit] : b.sets) rt.memory().write(*rt.tapestry().bead(id).cell(sym), value::parse_literal(lit));
    out.beads[b.label] = id;
  }
  for (const auto& t : c.tuples) {
    if (c.bead(t.beads.front())->rank != rank) continue;
    TupleSpaceDecl decl;
    decl.symbols = t.symbols;
    for (const auto& l : t.beads) decl.beads.push_back(out.beads.at(l));
    rt.share_tuple(decl);
  }
  for (const auto& w : c.weaves) {
    if (c.weave_rank(w) != rank) continue;
    std::vector<BeadId> beads;
    for (const auto& l : w.beads) beads.push_back(out.beads.at(l));
    out.weaves[w.label] = rt.define_weave(std::move(beads), w.label);
  }
  for (const auto& s : c.strings) {
    if (c.weave_rank(*c.weave(s.weave)) != rank) continue;
    out.strings.push_back(rt.spawn_string(out.weaves.at(s.weave), s.entry));
  }
  return out;
}

GridConfig grid_config(const TapestryConfig& c, const SchedulerConfig& scheduler) {
  GridConfig g;
  g.scheduler = scheduler;
  if (c.grid) {
    g.ranks = c.grid->ranks;
    g.nodes = c.grid->nodes;
    g.total_bits = c.grid->total_bits;
    g.vm_bits = c.grid->vm_bits;
    g.steps_per_tick = c.grid->steps_per_tick;
    g.network = c.grid->network;
  }
  return g;
}

std::unique_ptr<Grid> build_grid(const TapestryConfig& c, const SchedulerConfig& scheduler) {
  auto grid = std::make_unique<Grid>(grid_config(c, scheduler));
  if (!c.grid || c.grid->connect_all) grid->connect_all();
  for (std::uint32_t r = 0; r < grid->ranks(); ++r) build_tapestry(grid->rank(r), c, r);
  for (const auto& e : c.events) grid->schedule(e.event);
  return grid;
}

}  // namespace weaves
