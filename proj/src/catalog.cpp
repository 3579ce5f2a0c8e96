#include "weaves/catalog.hpp"

#include <algorithm>
#include <map>

#include "weaves/apps/delay.hpp"
#include "weaves/apps/pde.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

namespace weaves {

namespace {

constexpr std::uint64_t kDelayChunk = 20'000;

StepStatus count_step(StringContext& ctx) {
  const std::int64_t count = ctx.read_i64("count");
  if (count >= ctx.read_i64("limit")) return StepStatus::Finished;
  ctx.write_i64("count", count + 1);
  return count + 1 >= ctx.read_i64("limit") ? StepStatus::Finished : StepStatus::Continue;
}

StepStatus call_step(StringContext& ctx) {
  const std::int64_t count = ctx.read_i64("count");
  if (count >= ctx.read_i64("limit")) return StepStatus::Finished;
  ctx.write_f64("acc", ctx.call("step", {ctx.read_f64("acc")}).at(0));
  ctx.write_i64("count", count + 1);
  return count + 1 >= ctx.read_i64("limit") ? StepStatus::Finished : StepStatus::Continue;
}

StepStatus delay_step(StringContext& ctx) {
  Frame& f = ctx.frame();
  if (f.pc == 0) {
    ctx.write("left", ctx.read("work"));
    f.pc = 1;
  }
  const std::uint64_t left = value::to_u64(ctx.read("left"));
  const std::uint64_t k = std::min(kDelayChunk, left);
  ctx.write("acc", value::from_u64(apps::delay_loop(k, value::to_u64(ctx.read("acc")))));
  ctx.write("left", value::from_u64(left - k));
  return left == k ? StepStatus::Finished : StepStatus::Continue;
}

StepStatus lock_pair_step(StringContext& ctx) {
  Frame& f = ctx.frame();
  const std::string first = value::to_string(ctx.read("first"));
  const std::string second = value::to_string(ctx.read("second"));
  switch (f.pc) {
    case 0:
      if (!ctx.acquire(first)) return StepStatus::Blocked;
      f.pc = 1;
      return StepStatus::Yield;
    case 1:
      if (!ctx.acquire(second)) return StepStatus::Blocked;
      f.pc = 2;
      return StepStatus::Continue;
    default:
      ctx.write_i64("count", ctx.read_i64("count") + 1);
      ctx.release(second);
      ctx.release(first);
      return StepStatus::Finished;
  }
}

const std::map<std::string, Program, std::less<>>& programs() {
  static const std::map<std::string, Program, std::less<>> p = {
      {"count", count_step},
      {"call-step", call_step},
      {"delay", delay_step},
      {"lock-pair", lock_pair_step},
      {"noop", [](StringContext&) { return StepStatus::Finished; }},
  };
  return p;
}

NativeFunction unary(double (*op)(double)) {
  return [op](StringContext&, std::span<const double> a) { return std::vector<double>{op(a.empty() ? 0.0 : a[0])}; };
}

const std::map<std::string, FunctionDef, std::less<>>& functions() {
  static const std::map<std::string, FunctionDef, std::less<>> f = {
      {"increment", {"increment", "(f64)->(f64)", unary([](double x) { return x + 1.0; })}},
      {"double", {"double", "(f64)->(f64)", unary([](double x) { return 2.0 * x; })}},
      {"square", {"square", "(f64)->(f64)", unary([](double x) { return x * x; })}},
  };
  return f;
}

}  // namespace

std::optional<Program> catalog_program(std::string_view name) {
  auto it = programs().find(name);
  if (it == programs().end()) return std::nullopt;
  return it->second;
}

std::optional<FunctionDef> catalog_function(std::string_view name) {
  auto it = functions().find(name);
  if (it == functions().end()) return std::nullopt;
  return it->second;
}

std::optional<ModuleDef> catalog_module(std::string_view name) {
  if (name == "counter") {
    ModuleDef m;
    m.name = "counter";
    m.globals = {{"count", value::from_i64(0)}, {"limit", value::from_i64(10)}, {"acc", value::from_f64(0.0)}};
    m.entries = {{"run", count_step}, {"calls", call_step}};
    FunctionDef step = *catalog_function("increment");
    step.name = "step";
    m.functions = {step};
    return m;
  }
  if (name == "delay") {
    ModuleDef m;
    m.name = "delay";
    m.globals = {{"work", value::from_u64(0)}, {"left", value::from_u64(0)}, {"acc", value::from_u64(1)}};
    m.entries = {{"run", delay_step}};
    return m;
  }
  if (name == "poisson") return apps::poisson_module();
  if (name == "mediator") return apps::mediator_module();
  return std::nullopt;
}

std::vector<std::string> catalog_program_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : programs()) out.push_back(k);
  return out;
}

std::vector<std::string> catalog_function_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : functions()) out.push_back(k);
  return out;
}

std::vector<std::string> catalog_module_names() { return {"counter", "delay", "mediator", "poisson"}; }

}  // namespace weaves
