#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "addm/assembly.hpp"
#include "addm/coupling.hpp"
#include "addm/fluid.hpp"
#include "addm/grid.hpp"
#include "addm/newton.hpp"
#include "addm/wells.hpp"

namespace addm {

// Solution methods: fully implicit on the whole domain, fully decoupled
// subdomain preconditioning, and three adaptive coupling strategies
// (front overlap, active neighborhoods, balanced weighted partition).
enum class Method { fim, cddm, addm01, addm02, addm03 };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

struct DtConfig {
  double init = 1.0;       // days
  double min = 1e-3;
  double max = 32.0;
  double growth = 2.0;     // applied when a step converges comfortably
  double cut = 0.5;        // applied when a step is rejected
  int target_newton = 12;  // grow dt when the step needed at most this many
};

struct SolverConfig {
  Method method = Method::fim;
  int tiles_x = 4, tiles_y = 4;
  ThresholdStrategy threshold = ThresholdStrategy::A;
  std::optional<double> threshold_override;  // fixed c_S, mainly for tests
  int expand_layers = 1;  // front expansion depth l
  int blocks = 0;         // region count for the balanced partition; 0 = auto
  BoundaryKind bc = BoundaryKind::dirichlet_pressure;
  NewtonConfig newton_global;  // rtol 1e-4 by default
  NewtonConfig newton_local;   // looser local solves seed the global one
  GmresOptions lin_global;
  GmresOptions lin_local;
  DtConfig dt;
  int workers = 0;  // OpenMP threads; 0 keeps the runtime default
  // Diagnostic hook: when set, every step uses this fixed coupling pattern
  // instead of the front-driven one.  Not reachable from decks.
  std::optional<CouplingPattern> pattern_override;

  SolverConfig() {
    newton_global.rtol = 1e-4;
    newton_local.rtol = 1e-2;
    lin_global.rtol = 1e-4;
    lin_local.rtol = 1e-2;
    // Short restarts stagnate once the gas bank sharpens the system, so run
    // effectively unrestarted cycles with headroom beyond the first one.
    lin_global.restart = 100;
    lin_global.max_iterations = 300;
    lin_local.restart = 100;
    lin_local.max_iterations = 300;
  }
};

enum class PrecondChoice { ilu0_then_block_jacobi, block_jacobi };

// Binds one implicit problem (whole domain or region) to the damped-Newton
// driver: assembly, preconditioned GMRES, update safeguards.
class FimProblem {
 public:
  FimProblem(const Grid& grid, const FluidParams& par,
             const std::vector<Well>& wells, const ProblemScope& scope,
             const ScopePattern& pattern, Vec n_old, double dt,
             const GmresOptions& lin, PrecondChoice precond,
             std::vector<int> row_groups, int n_groups);

  bool assemble(const Vec& x, bool with_jacobian);
  const Vec& residual() const { return F_; }
  const BlockCsrMatrix& jacobian() const { return J_; }
  bool solve_linear(Vec& d, long& iters);
  // Caps the initial step length so one update stays within the pressure cap
  // and a linearized saturation-change cap.
  double limit_alpha(const Vec& x, const Vec& d, const NewtonConfig& cfg) const;
  // out = x + alpha d with moles projected onto [0, inf).
  void apply_update(const Vec& x, double alpha, const Vec& d, Vec& out) const;

  const AssemblyScratch& scratch() const { return scratch_; }
  const ProblemScope& scope() const { return *scope_; }
  double linear_wall_seconds() const { return wall_linear_; }

 private:
  const Grid* grid_;
  const FluidParams* par_;
  const std::vector<Well>* wells_;
  const ProblemScope* scope_;
  const ScopePattern* pattern_;
  BlockCsrMatrix J_;
  Vec F_;
  Vec n_old_;
  double dt_;
  GmresOptions lin_;
  PrecondChoice precond_;
  std::vector<int> groups_;
  int n_groups_;
  AssemblyScratch scratch_;
  double wall_linear_ = 0;
};

// Moles of the start-of-step state in scope ordering (2 per scope cell).
Vec restrict_moles(const ProblemScope& scope, const FluidState& s);

struct StepAttempt {
  bool accepted = false;
  NewtonOutcome outcome = NewtonOutcome::max_iterations;
  int global_iterations = 0;
  long global_linear = 0;
  long local_iterations = 0;
  long local_linear = 0;
  int local_failures = 0;
  int n_regions = 0;           // 0 when no decomposition stage ran
  int coupled_subdomains = 0;  // members of multi-subdomain regions
  bool used_pattern = false;
  CouplingPattern pattern;
  // Converged well totals, lb-mol/day; production positive, injection stored
  // positive as well.
  std::array<double, 2> production{0, 0};
  std::array<double, 2> injection{0, 0};
  double wall_seconds = 0;
  double wall_local_seconds = 0;   // decomposition stage, max over regions
  double wall_linear_seconds = 0;  // global-stage GMRES time
};

class Simulator {
 public:
  Simulator(Grid grid, FluidParams par, std::vector<Well> wells,
            SolverConfig cfg);

  // One timestep attempt from s_n. delta history comes from (s_prev -> s_n)
  // over dt_prev; on the first step pass s_prev = s_n and dt_prev = dt.
  // `forced` overrides the coupling pattern (tests).
  StepAttempt advance(const FluidState& s_n, const FluidState& s_prev,
                      double dt, double dt_prev, FluidState& out,
                      const CouplingPattern* forced = nullptr);

  // The pattern the configured strategy would pick for this history.
  std::optional<CouplingPattern> plan_pattern(const FluidState& s_n,
                                              const FluidState& s_prev,
                                              double dt, double dt_prev);

  FluidState make_initial_state() const;

  const Grid& grid() const { return grid_; }
  const FluidParams& params() const { return par_; }
  const std::vector<Well>& wells() const { return wells_; }
  const SubdomainLayout& layout() const { return layout_; }
  const AdjGraph& adjacency() const { return adj_; }
  const SolverConfig& config() const { return cfg_; }
  const ProblemScope& global_scope() const { return global_scope_; }
  const Vec& last_delta() const { return last_delta_; }

 private:
  Grid grid_;
  FluidParams par_;
  std::vector<Well> wells_;
  SolverConfig cfg_;
  SubdomainLayout layout_;
  AdjGraph adj_;
  ProblemScope global_scope_;
  ScopePattern global_pattern_;
  std::vector<int> global_groups_;  // owner subdomain per scope cell
  Vec last_delta_;
};

}  // namespace addm
