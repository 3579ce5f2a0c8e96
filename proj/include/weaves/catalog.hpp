#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weaves/module.hpp"

namespace weaves {

/// Built-in code a tapestry config can refer to by name. Config files
/// cannot carry code, so every entry point and function they declare is
/// looked up here.
///
/// Programs and the globals they use:
///   count        count += 1 per step until count >= limit
///   call-step    acc = step(acc), count += 1 per step until count >= limit
///   delay        runs `work` busy-loop iterations in chunks; left, acc
///   lock-pair    acquires the locks named by `first` then `second`,
///                increments count, releases both
///   noop         finishes at once
/// Functions, all (f64)->(f64): increment, double, square.
/// Modules: counter, delay, poisson, mediator.
std::optional<Program> catalog_program(std::string_view name);
std::optional<FunctionDef> catalog_function(std::string_view name);
std::optional<ModuleDef> catalog_module(std::string_view name);

std::vector<std::string> catalog_program_names();
std::vector<std::string> catalog_function_names();
std::vector<std::string> catalog_module_names();

}  // namespace weaves
