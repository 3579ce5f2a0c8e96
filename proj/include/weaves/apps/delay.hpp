#pragma once

#include <cstdint>
#include <vector>

#include "weaves/scheduler.hpp"

namespace weaves::apps {

/// Busy loop of `iterations` dependent multiply-adds; returns the final
/// accumulator so the work cannot be elided.
std::uint64_t delay_loop(std::uint64_t iterations, std::uint64_t seed = 1);

struct DelayConfig {
  double target_seconds = 2.0;      // baseline duration to calibrate for
  std::uint32_t runs = 5;           // repetitions per point; the median is reported
  std::uint64_t chunk = 20'000;     // loop iterations per string step
  SchedulerConfig scheduler{SchedulingPolicy::RoundRobinClasses, 1, 64, false};
};

/// Loop iterations that take about `target_seconds` on this host.
std::uint64_t calibrate_delay(double target_seconds);

/// Seconds taken by one direct call of the loop.
double time_delay_baseline(std::uint64_t iterations);

struct DelayRun {
  double seconds = 0.0;
  std::uint64_t dispatches = 0;
  std::uint64_t steps = 0;
};

/// n singleton weaves, one string each, each running iterations / n of
/// the loop in `chunk`-sized steps. Only the scheduler run is timed.
DelayRun time_delay_weaves(std::uint32_t n, std::uint64_t iterations, const DelayConfig& config);

struct DelayPoint {
  std::uint32_t n = 0;
  std::vector<double> seconds;  // one per run
  double median = 0.0;
  double ratio = 0.0;       // median / baseline median
  double variation = 0.0;   // (max - min) / median over the runs
  std::uint64_t dispatches = 0;
  double switch_overhead = 0.0;  // (median - baseline) / dispatches, seconds
};

struct DelayReport {
  std::uint64_t iterations = 0;
  std::vector<double> baseline;
  double baseline_median = 0.0;
  std::vector<DelayPoint> points;
};

double median(std::vector<double> v);

/// Calibrates, times the direct baseline, then each n.
DelayReport run_delay_benchmark(const std::vector<std::uint32_t>& ns, const DelayConfig& config = {});

}  // namespace weaves::apps
