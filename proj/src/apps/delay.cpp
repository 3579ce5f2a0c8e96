#include "weaves/apps/delay.hpp"

#include <algorithm>
#include <ctime>
#include <string>

#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/value.hpp"

namespace weaves::apps {

std::uint64_t delay_loop(std::uint64_t iterations, std::uint64_t seed) {
  std::uint64_t x = seed;
  for (std::uint64_t i = 0; i < iterations; ++i) x = x * 6364136223846793005ULL + i;
  return x;
}

namespace {

// Process CPU time, so time the host gives to other processes is not counted.
struct Clock {
  using time_point = double;
  static time_point now() {
    timespec ts{};
    clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
  }
};

double seconds_since(Clock::time_point start) { return Clock::now() - start; }

volatile std::uint64_t g_sink = 0;

}  // namespace

double time_delay_baseline(std::uint64_t iterations) {
  auto start = Clock::now();
  g_sink = delay_loop(iterations);
  return seconds_since(start);
}

std::uint64_t calibrate_delay(double target_seconds) {
  if (!(target_seconds > 0.0)) throw Error(ErrorCode::InvalidArgument, "target must be positive");
  std::uint64_t iters = 1'000'000;
  double t = time_delay_baseline(iters);
  while (t < 0.05) {
    iters *= 4;
    t = time_delay_baseline(iters);
  }
  return static_cast<std::uint64_t>(static_cast<double>(iters) * target_seconds / t);
}

DelayRun time_delay_weaves(std::uint32_t n, std::uint64_t iterations, const DelayConfig& config) {
  if (n == 0 || config.chunk == 0) throw Error(ErrorCode::InvalidArgument, "n and chunk must be positive");
  RuntimeConfig rc;
  rc.scheduler = config.scheduler;
  Runtime rt(rc);
  const std::uint64_t chunk = config.chunk;
  ModuleDef m;
  m.name = "delay";
  m.globals = {{"work", value::from_u64(0)}, {"left", value::from_u64(0)}, {"acc", value::from_u64(1)}};
  m.entries = {{"run", [chunk](StringContext& ctx) {
                  Frame& f = ctx.frame();
                  if (f.pc == 0) {
                    ctx.write("left", ctx.read("work"));
                    f.pc = 1;
                  }
                  const std::uint64_t left = value::to_u64(ctx.read("left"));
                  const std::uint64_t k = std::min(chunk, left);
                  ctx.write("acc", value::from_u64(delay_loop(k, value::to_u64(ctx.read("acc")))));
                  ctx.write("left", value::from_u64(left - k));
                  return left == k ? StepStatus::Finished : StepStatus::Continue;
                }}};
  rt.register_module(std::move(m));
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string label = "d" + std::to_string(i);
    WeaveId w = rt.define_weave({rt.instantiate_bead("delay", label)}, label);
    rt.write(w, "work", value::from_u64(iterations / n + (i < iterations % n ? 1 : 0)));
    rt.spawn_string(w, "run");
  }
  auto start = Clock::now();
  RunResult r = rt.run();
  DelayRun out;
  out.seconds = seconds_since(start);
  if (r.outcome != RunOutcome::Finished) throw Error(ErrorCode::InvalidArgument, "delay strings did not finish");
  out.dispatches = rt.dispatches();
  out.steps = r.steps;
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

DelayReport run_delay_benchmark(const std::vector<std::uint32_t>& ns, const DelayConfig& config) {
  if (config.runs == 0) throw Error(ErrorCode::InvalidArgument, "runs must be positive");
  DelayReport rep;
  rep.iterations = calibrate_delay(config.target_seconds);
  for (std::uint32_t i = 0; i < config.runs; ++i) rep.baseline.push_back(time_delay_baseline(rep.iterations));
  rep.baseline_median = median(rep.baseline);
  for (std::uint32_t n : ns) {
    DelayPoint p;
    p.n = n;
    for (std::uint32_t i = 0; i < config.runs; ++i) {
      DelayRun r = time_delay_weaves(n, rep.iterations, config);
      p.seconds.push_back(r.seconds);
      p.dispatches = r.dispatches;
    }
    p.median = median(p.seconds);
    p.ratio = p.median / rep.baseline_median;
    auto [lo, hi] = std::minmax_element(p.seconds.begin(), p.seconds.end());
    p.variation = (*hi - *lo) / p.median;
    p.switch_overhead = p.dispatches ? (p.median - rep.baseline_median) / static_cast<double>(p.dispatches) : 0.0;
    rep.points.push_back(std::move(p));
  }
  return rep;
}

}  // namespace weaves::apps
