#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weaves/grid.hpp"
#include "weaves/module.hpp"
#include "weaves/runtime.hpp"

namespace weaves::apps {

enum class SourceKind : std::int64_t {
  Zero = 0,  // Laplace
  One = 1,   // -u'' = 1
  Sine = 2,  // -u'' = pi^2 sin(pi x)
};

double source_value(SourceKind k, double x);
/// Exact solution on [0,1] for the three sources with u(0)=ua, u(1)=ub.
double exact_solution(SourceKind k, double ua, double ub, double x);

/// One subdomain of a 1D Poisson problem -u'' = f.
struct PdeDomainSpec {
  double lo = 0.0;
  double hi = 0.5;
  double boundary = 0.0;  // Dirichlet value at the outer end
  std::uint32_t n = 33;   // grid points including both ends
  SourceKind source = SourceKind::Zero;
};

struct MediatorConfig {
  double initial = 0.0;  // first interface guess
  double theta = 0.5;    // relaxation factor in (0,1]
  double tolerance = 1e-10;
  std::uint32_t max_iterations = 500;
};

struct PdeResult {
  std::vector<double> left;   // solution on the left subdomain grid
  std::vector<double> right;  // solution on the right subdomain grid
  double interface = 0.0;
  std::uint32_t iterations = 0;
  std::vector<double> history;  // interface value after each update
};

/// Solver module: globals lo, hi, u_out (outer boundary value), n, side
/// (0 left, 1 right), source, u (solution), work (address of a tracked
/// scratch buffer); entry "solve".
ModuleDef poisson_module();
/// Mediator module: globals m_g, m_theta, m_tol, m_max, m_round, m_state
/// (0 running, 1 converged, 2 gave up), m_dl, m_dr, m_len_l, m_len_r,
/// m_have, m_hist; exported report(side, deriv, len) and interface().
ModuleDef mediator_module();

/// Writes a domain spec into a poisson bead and mediator settings into a
/// mediator bead, through the given weave.
void configure_solver(Runtime& rt, WeaveId weave, const PdeDomainSpec& spec, int side);
void configure_mediator(Runtime& rt, WeaveId weave, const MediatorConfig& cfg);

/// Labels of the beads and weaves of one solver pair.
struct PdePair {
  std::string left, right, mediator;  // bead labels
  std::string left_weave, right_weave;
};

/// Registers the modules if needed and builds the solver pair tapestry:
/// two poisson beads, one mediator bead, weaves <left, mediator> and
/// <right, mediator>, one string per weave.
PdePair build_pde_pair(Runtime& rt, const PdeDomainSpec& left, const PdeDomainSpec& right, const MediatorConfig& cfg,
                       const std::string& suffix = "1");

/// Reads the outcome of a pair after its strings finished. Throws
/// NoConvergence when the mediator gave up.
PdeResult read_pde_result(const Runtime& rt, const PdePair& pair);

/// Runs the mediated solve to completion on a fresh runtime.
PdeResult solve_mediated_pde(const PdeDomainSpec& left, const PdeDomainSpec& right, const MediatorConfig& cfg,
                             const SchedulerConfig& scheduler = {});

/// Splits [0,1] at 0.5 into two subdomains of n points each.
std::pair<PdeDomainSpec, PdeDomainSpec> unit_problem(SourceKind source, double ua, double ub, std::uint32_t n);

struct PdeGridOutcome {
  PdeResult result;
  std::uint32_t final_rank = 0;
  std::vector<std::string> log;
  std::uint64_t ticks = 0;
};

/// Runs the pair on rank 0 of a two-rank grid, optionally migrating the
/// whole island to rank 1 at `migrate_at` ticks.
PdeGridOutcome run_pde_on_grid(const PdeDomainSpec& left, const PdeDomainSpec& right, const MediatorConfig& cfg,
                               std::optional<std::uint64_t> migrate_at, std::uint32_t steps_per_tick = 4);

}  // namespace weaves::apps
