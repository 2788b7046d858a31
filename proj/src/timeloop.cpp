#include "addm/timeloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>

namespace addm {

namespace {

double wall_now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

Method method_from_string(const std::string& s) {
  if (s == "FIM" || s == "fim") return Method::fim;
  if (s == "CDDM" || s == "cddm") return Method::cddm;
  if (s == "ADDM01" || s == "addm01") return Method::addm01;
  if (s == "ADDM02" || s == "addm02") return Method::addm02;
  if (s == "ADDM03" || s == "addm03") return Method::addm03;
  throw ConfigError("unknown method '" + s +
                    "' (expected FIM, CDDM, ADDM01, ADDM02 or ADDM03)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::fim: return "FIM";
    case Method::cddm: return "CDDM";
    case Method::addm01: return "ADDM01";
    case Method::addm02: return "ADDM02";
    case Method::addm03: return "ADDM03";
  }
  return "?";
}

Vec restrict_moles(const ProblemScope& scope, const FluidState& s) {
  Vec n_old(static_cast<size_t>(2 * scope.n()));
  for (int l = 0; l < scope.n(); ++l) {
    const int c = scope.cells[l];
    n_old[2 * l + kOil] = s.n(c, kOil);
    n_old[2 * l + kGas] = s.n(c, kGas);
  }
  return n_old;
}

FimProblem::FimProblem(const Grid& grid, const FluidParams& par,
                       const std::vector<Well>& wells,
                       const ProblemScope& scope, const ScopePattern& pattern,
                       Vec n_old, double dt, const GmresOptions& lin,
                       PrecondChoice precond, std::vector<int> row_groups,
                       int n_groups)
    : grid_(&grid),
      par_(&par),
      wells_(&wells),
      scope_(&scope),
      pattern_(&pattern),
      J_(pattern.matrix),
      n_old_(std::move(n_old)),
      dt_(dt),
      lin_(lin),
      precond_(precond),
      groups_(std::move(row_groups)),
      n_groups_(n_groups) {
  F_.assign(static_cast<size_t>(kCellDof * scope.n()), 0.0);
}

bool FimProblem::assemble(const Vec& x, bool with_jacobian) {
  return assemble_system(*scope_, *grid_, *par_, *wells_, x, n_old_, dt_,
                         with_jacobian ? &J_ : nullptr,
                         with_jacobian ? pattern_ : nullptr, F_, scratch_);
}

bool FimProblem::solve_linear(Vec& d, long& iters) {
  const double t0 = wall_now();
  Vec b(F_.size());
  for (size_t i = 0; i < b.size(); ++i) b[i] = -F_[i];
  d.assign(b.size(), 0.0);

  Ilu0 ilu;
  BlockJacobi bj;
  const Preconditioner* M = nullptr;
  if (precond_ == PrecondChoice::ilu0_then_block_jacobi && ilu.factor(J_))
    M = &ilu;
  if (!M) {
    if (bj.factor(J_, groups_, n_groups_)) M = &bj;
  }
  if (!M) {
    wall_linear_ += wall_now() - t0;
    iters = 0;
    return false;
  }
  const GmresResult res = gmres(J_, b, d, *M, lin_);
  iters = res.iterations;
  wall_linear_ += wall_now() - t0;
  // A stalled but substantially reduced residual still gives the line search
  // a usable direction; only a barely reduced system counts as failure.
  return res.converged || res.relative_residual <= 0.1;
}

double FimProblem::limit_alpha(const Vec& x, const Vec& d,
                               const NewtonConfig& cfg) const {
  (void)x;
  double alpha = 1.0;
  for (int l = 0; l < scope_->n(); ++l) {
    const double dP = std::abs(d[3 * l]);
    if (dP * alpha > cfg.dp_cap) alpha = cfg.dp_cap / dP;
    const CellProps& pr = scratch_.props[l];
    if (!pr.ok) continue;
    for (int j = 0; j < kNumComp; ++j) {
      const double dS =
          std::abs(pr.s_dp[j] * d[3 * l] + pr.s_dn[j][kOil] * d[3 * l + 1] +
                   pr.s_dn[j][kGas] * d[3 * l + 2]);
      if (dS * alpha > cfg.ds_cap) alpha = cfg.ds_cap / dS;
    }
  }
  return alpha;
}

void FimProblem::apply_update(const Vec& x, double alpha, const Vec& d,
                              Vec& out) const {
  out.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + alpha * d[i];
  for (int l = 0; l < scope_->n(); ++l) {
    out[3 * l + 1] = std::max(0.0, out[3 * l + 1]);
    out[3 * l + 2] = std::max(0.0, out[3 * l + 2]);
  }
}

Simulator::Simulator(Grid grid, FluidParams par, std::vector<Well> wells,
                     SolverConfig cfg)
    : grid_(std::move(grid)),
      par_(std::move(par)),
      wells_(std::move(wells)),
      cfg_(cfg) {
  const int cache = std::max(2, cfg_.expand_layers);
  layout_ = tile_partition(grid_, cfg_.tiles_x, cfg_.tiles_y, cache);
  adj_ = subdomain_adjacency(layout_, grid_);
  attach_wells(wells_, grid_, &layout_);
  global_scope_ = make_global_scope(grid_, wells_);
  global_pattern_ = build_pattern(global_scope_, wells_);
  global_groups_.resize(global_scope_.n());
  for (int l = 0; l < global_scope_.n(); ++l)
    global_groups_[l] = layout_.owner[global_scope_.cells[l]];
  last_delta_.assign(static_cast<size_t>(2 * grid_.num_cells()), 0.0);
}

FluidState Simulator::make_initial_state() const {
  return initial_state(par_, grid_.pore_volume_ref(), grid_.num_cells());
}

std::optional<CouplingPattern> Simulator::plan_pattern(const FluidState& s_n,
                                                       const FluidState& s_prev,
                                                       double dt,
                                                       double dt_prev) {
  switch (cfg_.method) {
    case Method::fim:
      return std::nullopt;
    case Method::cddm:
      return all_independent_pattern(layout_.n_sub);
    default:
      break;
  }
  if (cfg_.pattern_override) return cfg_.pattern_override;
  last_delta_ = saturation_delta(grid_, par_, s_prev, s_n);
  const double cs = cfg_.threshold_override
                        ? *cfg_.threshold_override
                        : threshold_value(cfg_.threshold, dt_prev, dt,
                                          cfg_.dt.max);
  switch (cfg_.method) {
    case Method::addm01:
      return couple_overlap(layout_, grid_, adj_, last_delta_, cs,
                            cfg_.expand_layers);
    case Method::addm02:
      return couple_active_neighborhood(layout_, grid_, adj_, last_delta_, cs);
    case Method::addm03:
      return couple_balanced_partition(layout_, grid_, adj_, last_delta_, cs,
                                       cfg_.expand_layers, cfg_.blocks);
    default:
      return std::nullopt;
  }
}

StepAttempt Simulator::advance(const FluidState& s_n, const FluidState& s_prev,
                               double dt, double dt_prev, FluidState& out,
                               const CouplingPattern* forced) {
  const double t0 = wall_now();
  StepAttempt rep;

  std::optional<CouplingPattern> pat;
  if (forced)
    pat = *forced;
  else
    pat = plan_pattern(s_n, s_prev, dt, dt_prev);
  if (pat) {
    validate_pattern(*pat, adj_);
    rep.used_pattern = true;
    rep.pattern = *pat;
    rep.n_regions = pat->n_regions();
    for (int k = 0; k < pat->n_subdomains; ++k)
      if (!pat->independent[k]) ++rep.coupled_subdomains;
  }

  // Decomposition stage: independent implicit solves per region from the
  // start-of-step state; failed regions fall back to that state.
  FluidState guess = s_n;
  if (pat) {
    const double tl0 = wall_now();
    const int R = pat->n_regions();
    std::vector<ProblemScope> scopes(R);
    std::vector<Vec> xr(R);
    std::vector<std::uint8_t> solved(R, 0);
    std::vector<long> r_iters(R, 0), r_lin(R, 0);
    std::vector<std::uint8_t> r_fail(R, 0);

#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < R; ++r) {
      try {
        std::vector<int> cells;
        for (int k : pat->regions[r])
          cells.insert(cells.end(), layout_.cells[k].begin(),
                       layout_.cells[k].end());
        scopes[r] = make_scope(grid_, std::move(cells), cfg_.bc, wells_);
        snapshot_boundary(scopes[r], grid_, par_, s_n);
        const ScopePattern sp = build_pattern(scopes[r], wells_);

        // One block-Jacobi group per member subdomain.
        std::vector<int> groups(scopes[r].n());
        std::vector<int> dense(layout_.n_sub, -1);
        for (size_t m = 0; m < pat->regions[r].size(); ++m)
          dense[pat->regions[r][m]] = static_cast<int>(m);
        for (int l = 0; l < scopes[r].n(); ++l)
          groups[l] = dense[layout_.owner[scopes[r].cells[l]]];

        FimProblem lp(grid_, par_, wells_, scopes[r], sp,
                      restrict_moles(scopes[r], s_n), dt, cfg_.lin_local,
                      PrecondChoice::block_jacobi, std::move(groups),
                      static_cast<int>(pat->regions[r].size()));
        restrict_state(scopes[r], s_n, xr[r]);
        const NewtonReport nr = newton_solve(lp, xr[r], cfg_.newton_local);
        r_iters[r] = nr.iterations;
        r_lin[r] = nr.linear_iterations;
        if (nr.converged)
          solved[r] = 1;
        else
          r_fail[r] = 1;
      } catch (const std::exception&) {
        r_fail[r] = 1;
      }
    }

    for (int r = 0; r < R; ++r) {
      rep.local_iterations += r_iters[r];
      rep.local_linear += r_lin[r];
      rep.local_failures += r_fail[r];
      if (solved[r]) prolong_state(scopes[r], xr[r], guess);
    }
    rep.wall_local_seconds = wall_now() - tl0;
  }

  // Global stage. With a decomposition stage the convergence reference is
  // the residual at the start-of-step state, not at the improved guess.
  FimProblem gp(grid_, par_, wells_, global_scope_, global_pattern_,
                restrict_moles(global_scope_, s_n), dt, cfg_.lin_global,
                PrecondChoice::ilu0_then_block_jacobi, global_groups_,
                layout_.n_sub);
  std::optional<double> norm_ref;
  if (rep.used_pattern) {
    Vec xs;
    restrict_state(global_scope_, s_n, xs);
    if (gp.assemble(xs, false)) norm_ref = norm2(gp.residual());
  }
  Vec xg;
  restrict_state(global_scope_, guess, xg);
  const NewtonReport nr = newton_solve(gp, xg, cfg_.newton_global, norm_ref);
  rep.global_iterations = nr.iterations;
  rep.global_linear = nr.linear_iterations;
  rep.outcome = nr.outcome;
  rep.accepted = nr.converged;
  rep.wall_linear_seconds = gp.linear_wall_seconds();

  if (rep.accepted) {
    out = s_n;
    prolong_state(global_scope_, xg, out);
    const auto& totals = gp.scratch().well_totals;
    for (size_t sw = 0; sw < global_scope_.well_ids.size(); ++sw) {
      const Well& w = wells_[global_scope_.well_ids[sw]];
      for (int i = 0; i < kNumComp; ++i) {
        if (w.kind == WellKind::producer)
          rep.production[i] += totals[sw].q[i];
        else
          rep.injection[i] -= totals[sw].q[i];
      }
    }
  }
  rep.wall_seconds = wall_now() - t0;
  return rep;
}

}  // namespace addm
