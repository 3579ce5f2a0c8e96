#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/ids.hpp"

namespace weaves {

class StringContext;

/// What a string step reports back to the scheduler.
enum class StepStatus {
  Continue,  // more work; may be preempted at the quantum boundary
  Yield,     // give up the rest of the quantum
  Blocked,   // waiting on a lock (see StringContext::acquire)
  Finished,
  Failed,
};

/// Resumption state of a string: a program counter plus named locals. A
/// program keeps everything it needs across steps here or in cells, which is
/// what makes strings checkpointable and migratable.
struct Frame {
  std::uint64_t pc = 0;
  std::map<std::string, Bytes, std::less<>> locals;

  std::int64_t get_i64(std::string_view name, std::int64_t fallback = 0) const;
  double get_f64(std::string_view name, double fallback = 0.0) const;
  std::vector<double> get_f64s(std::string_view name) const;
  void set_i64(std::string_view name, std::int64_t v);
  void set_f64(std::string_view name, double v);
  void set_f64s(std::string_view name, std::span<const double> v);

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// A step program: called once per scheduler step until it reports Finished.
using Program = std::function<StepStatus(StringContext&)>;

/// Native code of an exported function. Arguments and results are numeric;
/// the function reaches globals through the calling string's namespace.
using NativeFunction = std::function<std::vector<double>(StringContext&, std::span<const double>)>;

struct GlobalDecl {
  std::string name;
  Bytes initial;
};

struct EntryPoint {
  std::string name;
  Program program;
};

struct FunctionDef {
  std::string name;
  std::string signature;  // descriptor such as "(f64,f64)->(f64)"; compared verbatim on rebind
  NativeFunction fn;
};

struct ModuleDef {
  std::string name;
  std::vector<GlobalDecl> globals;
  std::vector<EntryPoint> entries;
  std::vector<FunctionDef> functions;
};

/// Code context of one exported function, shared by every bead of its module.
struct FunctionImpl {
  std::string module;
  std::string name;
  std::string signature;
  NativeFunction fn;
};

using FunctionHandle = std::shared_ptr<const FunctionImpl>;

}  // namespace weaves
