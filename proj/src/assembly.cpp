#include "addm/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace addm {

FaceFluxResult component_face_flux(const FluidParams& par, double trans,
                                   double dz, const CellProps& a,
                                   const CellProps& b, bool with_derivs) {
  FaceFluxResult r;
  const double C = par.units.darcy * trans;
  const double g = par.gravity_on ? par.units.gravity : 0.0;
  for (int j = 0; j < 2; ++j) {
    const double rho_avg = 0.5 * (a.rho[j] + b.rho[j]);
    const double dphi = (a.p - a.pc[j]) - (b.p - b.pc[j]) - rho_avg * g * dz;
    const bool up_a = dphi >= 0;
    const CellProps& up = up_a ? a : b;
    r.flux[j] = C * up.lam[j] * dphi;
    if (!with_derivs) continue;
    const double gdz = 0.5 * g * dz;
    const double dphi_da[3] = {1.0 - a.pc_ds[j] * a.s_dp[j] - a.rho_dp[j] * gdz,
                               -a.pc_ds[j] * a.s_dn[j][0],
                               -a.pc_ds[j] * a.s_dn[j][1]};
    const double dphi_db[3] = {-1.0 + b.pc_ds[j] * b.s_dp[j] - b.rho_dp[j] * gdz,
                               b.pc_ds[j] * b.s_dn[j][0],
                               b.pc_ds[j] * b.s_dn[j][1]};
    const double clam = C * up.lam[j];
    for (int m = 0; m < 3; ++m) {
      r.da[j][m] = clam * dphi_da[m];
      r.db[j][m] = clam * dphi_db[m];
    }
    // Upstream mobility varies with the upstream cell's own state.
    double* dup = up_a ? r.da[j] : r.db[j];
    const double lam_d[3] = {up.lam_dp[j], up.lam_dn[j][0], up.lam_dn[j][1]};
    const double cphi = C * dphi;
    for (int m = 0; m < 3; ++m) dup[m] += cphi * lam_d[m];
  }
  return r;
}

FaceFluxResult component_face_flux(const Grid& grid, const Face& face,
                                   const FluidParams& par,
                                   const FluidState& state) {
  const double pv = grid.pore_volume_ref();
  const CellProps a = eval_cell_props(par, pv, state.pressure[face.a],
                                      &state.moles[2 * face.a]);
  const CellProps b = eval_cell_props(par, pv, state.pressure[face.b],
                                      &state.moles[2 * face.b]);
  return component_face_flux(par, face.trans_geo,
                             grid.depth[face.a] - grid.depth[face.b], a, b);
}

ProblemScope make_scope(const Grid& grid, std::vector<int> cells,
                        BoundaryKind bc, const std::vector<Well>& wells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  ProblemScope s;
  s.bc = bc;
  s.cells = std::move(cells);
  s.local_of.assign(grid.num_cells(), -1);
  for (int l = 0; l < s.n(); ++l) {
    const int c = s.cells[l];
    if (c < 0 || c >= grid.num_cells() || !grid.is_active(c))
      throw ConfigError("scope contains an invalid or inactive cell");
    s.local_of[c] = l;
  }
  s.whole_domain = (s.n() == grid.num_active());

  for (const Face& f : grid.faces) {
    const int la = s.local_of[f.a];
    const int lb = s.local_of[f.b];
    const double dz = grid.depth[f.a] - grid.depth[f.b];
    if (la >= 0 && lb >= 0) {
      s.faces.push_back({la, lb, f.trans_geo, dz});
    } else if (la >= 0 || lb >= 0) {
      ScopeBoundaryFace bf;
      bf.interior_is_a = la >= 0;
      bf.lcell = bf.interior_is_a ? la : lb;
      bf.ext_cell = bf.interior_is_a ? f.b : f.a;
      bf.trans = f.trans_geo;
      bf.dz = dz;
      s.boundary.push_back(bf);
    }
  }

  for (int w = 0; w < static_cast<int>(wells.size()); ++w) {
    int inside = 0;
    for (int c : wells[w].cells) inside += (s.local_of[c] >= 0);
    if (inside == static_cast<int>(wells[w].cells.size()))
      s.well_ids.push_back(w);
    else if (inside > 0)
      throw ConfigError("well " + wells[w].name + " straddles the scope");
  }

  const int n = s.n();
  s.inc_ptr.assign(n + 1, 0);
  for (const ScopeFace& f : s.faces) {
    ++s.inc_ptr[f.la + 1];
    ++s.inc_ptr[f.lb + 1];
  }
  for (int l = 0; l < n; ++l) s.inc_ptr[l + 1] += s.inc_ptr[l];
  s.inc_face.resize(2 * s.faces.size());
  s.inc_sign.resize(2 * s.faces.size());
  {
    std::vector<int> fill(n, 0);
    for (int fi = 0; fi < static_cast<int>(s.faces.size()); ++fi) {
      const ScopeFace& f = s.faces[fi];
      int p = s.inc_ptr[f.la] + fill[f.la]++;
      s.inc_face[p] = fi;
      s.inc_sign[p] = 1;
      p = s.inc_ptr[f.lb] + fill[f.lb]++;
      s.inc_face[p] = fi;
      s.inc_sign[p] = -1;
    }
  }

  s.binc_ptr.assign(n + 1, 0);
  for (const auto& bf : s.boundary) ++s.binc_ptr[bf.lcell + 1];
  for (int l = 0; l < n; ++l) s.binc_ptr[l + 1] += s.binc_ptr[l];
  s.binc_face.resize(s.boundary.size());
  {
    std::vector<int> fill(n, 0);
    for (int fi = 0; fi < static_cast<int>(s.boundary.size()); ++fi)
      s.binc_face[s.binc_ptr[s.boundary[fi].lcell] + fill[s.boundary[fi].lcell]++] = fi;
  }

  s.perf_ptr.assign(n + 1, 0);
  for (int si = 0; si < static_cast<int>(s.well_ids.size()); ++si)
    for (int c : wells[s.well_ids[si]].cells) ++s.perf_ptr[s.local_of[c] + 1];
  for (int l = 0; l < n; ++l) s.perf_ptr[l + 1] += s.perf_ptr[l];
  s.perf_ref.resize(s.perf_ptr[n]);
  {
    std::vector<int> fill(n, 0);
    for (int si = 0; si < static_cast<int>(s.well_ids.size()); ++si) {
      const Well& w = wells[s.well_ids[si]];
      for (int p = 0; p < static_cast<int>(w.cells.size()); ++p) {
        const int l = s.local_of[w.cells[p]];
        s.perf_ref[s.perf_ptr[l] + fill[l]++] = {si, p};
      }
    }
  }
  return s;
}

ProblemScope make_global_scope(const Grid& grid,
                               const std::vector<Well>& wells) {
  std::vector<int> cells;
  cells.reserve(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c)
    if (grid.is_active(c)) cells.push_back(c);
  return make_scope(grid, std::move(cells), BoundaryKind::dirichlet_pressure,
                    wells);
}

void snapshot_boundary(ProblemScope& scope, const Grid& grid,
                       const FluidParams& par, const FluidState& state_n) {
  const double pv = grid.pore_volume_ref();
  for (auto& bf : scope.boundary) {
    bf.ext = eval_cell_props(par, pv, state_n.pressure[bf.ext_cell],
                             &state_n.moles[2 * bf.ext_cell]);
    if (!bf.ext.ok)
      throw ConfigError("boundary snapshot hit an invalid exterior state");
    if (scope.bc == BoundaryKind::fixed_component_flux) {
      const int in_cell = scope.cells[bf.lcell];
      const CellProps in = eval_cell_props(par, pv, state_n.pressure[in_cell],
                                           &state_n.moles[2 * in_cell]);
      if (!in.ok)
        throw ConfigError("boundary snapshot hit an invalid interior state");
      const CellProps& a = bf.interior_is_a ? in : bf.ext;
      const CellProps& b = bf.interior_is_a ? bf.ext : in;
      const FaceFluxResult r =
          component_face_flux(par, bf.trans, bf.dz, a, b, false);
      bf.flux[0] = r.flux[0];
      bf.flux[1] = r.flux[1];
    }
  }
}

void restrict_state(const ProblemScope& scope, const FluidState& s, Vec& x) {
  x.resize(3 * scope.n());
  for (int l = 0; l < scope.n(); ++l) {
    const int c = scope.cells[l];
    x[3 * l] = s.pressure[c];
    x[3 * l + 1] = s.moles[2 * c];
    x[3 * l + 2] = s.moles[2 * c + 1];
  }
}

void prolong_state(const ProblemScope& scope, const Vec& x, FluidState& s) {
  for (int l = 0; l < scope.n(); ++l) {
    const int c = scope.cells[l];
    s.pressure[c] = x[3 * l];
    s.moles[2 * c] = x[3 * l + 1];
    s.moles[2 * c + 1] = x[3 * l + 2];
  }
}

ScopePattern build_pattern(const ProblemScope& scope,
                           const std::vector<Well>& wells) {
  const int n = scope.n();
  std::vector<std::vector<int>> cols(n);
  for (int l = 0; l < n; ++l) cols[l].push_back(l);
  for (const ScopeFace& f : scope.faces) {
    cols[f.la].push_back(f.lb);
    cols[f.lb].push_back(f.la);
  }
  // The eliminated bottom-hole pressure makes every perforated cell of a
  // well depend on every other one.
  for (int si : scope.well_ids)
    for (int ca : wells[si].cells)
      for (int cb : wells[si].cells)
        if (ca != cb) cols[scope.local_of[ca]].push_back(scope.local_of[cb]);
  for (auto& c : cols) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  ScopePattern p;
  p.matrix = BlockCsrMatrix::from_pattern(n, cols);
  p.inc_entry.resize(scope.inc_face.size());
  for (int l = 0; l < n; ++l)
    for (int e = scope.inc_ptr[l]; e < scope.inc_ptr[l + 1]; ++e) {
      const ScopeFace& f = scope.faces[scope.inc_face[e]];
      const int other = (scope.inc_sign[e] > 0) ? f.lb : f.la;
      p.inc_entry[e] = p.matrix.find(l, other);
    }
  p.well_entry.resize(scope.well_ids.size());
  for (size_t si = 0; si < scope.well_ids.size(); ++si) {
    const auto& cells = wells[scope.well_ids[si]].cells;
    const int np = static_cast<int>(cells.size());
    p.well_entry[si].resize(np * np);
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < np; ++b)
        p.well_entry[si][a * np + b] =
            p.matrix.find(scope.local_of[cells[a]], scope.local_of[cells[b]]);
  }
  return p;
}

namespace {

bool assemble_impl(const ProblemScope& scope, const Grid& grid,
                   const FluidParams& par, const std::vector<Well>& wells,
                   const Vec& x, const Vec& n_old, double dt, BlockCsrMatrix* J,
                   const ScopePattern* pattern, Vec& F,
                   AssemblyScratch& scratch,
                   const std::vector<WellState>* fixed_wells, bool parallel) {
  const int n = scope.n();
  const double pv_ref = grid.pore_volume_ref();
  const double wv = 1.0 / pv_ref;      // volume-balance row scale
  const double wn = dt / pv_ref;       // conservation row scale
  const bool with_jac = J != nullptr;

  F.assign(3 * n, 0.0);
  if (with_jac) J->zero_values();
  scratch.props.resize(n);
  scratch.face_flux.resize(scope.faces.size());
  scratch.bface_flux.resize(scope.boundary.size());
  scratch.bad_cell = -1;

#pragma omp parallel for schedule(static) if (parallel)
  for (int l = 0; l < n; ++l)
    scratch.props[l] = eval_cell_props(par, pv_ref, x[3 * l], &x[3 * l + 1]);
  for (int l = 0; l < n; ++l)
    if (!scratch.props[l].ok) {
      scratch.bad_cell = scope.cells[l];
      return false;
    }

  const int nf = static_cast<int>(scope.faces.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (int f = 0; f < nf; ++f) {
    const ScopeFace& sf = scope.faces[f];
    scratch.face_flux[f] =
        component_face_flux(par, sf.trans, sf.dz, scratch.props[sf.la],
                            scratch.props[sf.lb], with_jac);
  }

  const int nb = static_cast<int>(scope.boundary.size());
  if (scope.bc == BoundaryKind::dirichlet_pressure) {
#pragma omp parallel for schedule(static) if (parallel)
    for (int f = 0; f < nb; ++f) {
      const ScopeBoundaryFace& bf = scope.boundary[f];
      const CellProps& in = scratch.props[bf.lcell];
      const CellProps& a = bf.interior_is_a ? in : bf.ext;
      const CellProps& b = bf.interior_is_a ? bf.ext : in;
      scratch.bface_flux[f] =
          component_face_flux(par, bf.trans, bf.dz, a, b, with_jac);
    }
  }

  // Wells: resolved against the current iterate unless the caller froze them.
  const int nw = static_cast<int>(scope.well_ids.size());
  scratch.well_states.resize(nw);
  scratch.perf_rates.resize(nw);
  scratch.well_totals.assign(nw, {});
  scratch.well_chain.resize(nw);
  scratch.chain_active.assign(nw, 0);
  for (int si = 0; si < nw; ++si) {
    const Well& w = wells[scope.well_ids[si]];
    const int np = static_cast<int>(w.cells.size());
    std::vector<CellProps> wprops(np);
    for (int p = 0; p < np; ++p) wprops[p] = scratch.props[scope.local_of[w.cells[p]]];
    std::vector<double> wi(np), dz(np);
    for (int p = 0; p < np; ++p) {
      wi[p] = w.wi[p];
      dz[p] = grid.depth[w.cells[p]] - grid.depth[w.cells.front()];
    }
    WellState ws;
    if (fixed_wells) {
      ws = (*fixed_wells)[si];
    } else {
      const double target = (w.control.kind == ControlKind::bhp)
                                ? w.control.value
                                : molar_target(w, par);
      ws = resolve_control(w, par, wi, dz, wprops, target);
    }
    scratch.well_states[si] = ws;
    scratch.perf_rates[si].resize(np);
    WellTotals tot;
    tot.shut = ws.shut;
    for (int p = 0; p < np; ++p) {
      scratch.perf_rates[si][p] = perf_rate(w, ws, par, wi[p], dz[p], wprops[p]);
      tot.q[0] += scratch.perf_rates[si][p].q[0];
      tot.q[1] += scratch.perf_rates[si][p].q[1];
      tot.crossflow = tot.crossflow || scratch.perf_rates[si][p].crossflow;
    }
    tot.crossflow = tot.crossflow || ws.crossflow_flagged;
    scratch.well_totals[si] = tot;

    // Sensitivity of the eliminated bottom-hole pressure. Differentiating
    // the rate constraint sum_p q_c(x_p, p_bh) = const gives
    //   d p_bh / d x_q = -(d q_c(q) / d x) / (sum_p d q_c(p) / d p_bh)
    // with c the controlled component. Skipped when p_bh is held fixed
    // (explicit bottom-hole control, limit mode, shut, or frozen states).
    if (with_jac && !fixed_wells && w.control.kind != ControlKind::bhp &&
        !ws.bhp_mode && !ws.shut) {
      const int c = w.component;
      double denom = 0;
      for (int p = 0; p < np; ++p) denom += scratch.perf_rates[si][p].dq_dpbh[c];
      if (std::abs(denom) > 1e-30) {
        scratch.well_chain[si].resize(np);
        for (int q = 0; q < np; ++q)
          for (int m = 0; m < 3; ++m)
            scratch.well_chain[si][q][m] =
                -scratch.perf_rates[si][q].dq_dx[c][m] / denom;
        scratch.chain_active[si] = 1;
      }
    }
  }

  // Gather: each thread owns whole rows, so writes never race.
#pragma omp parallel for schedule(static) if (parallel)
  for (int l = 0; l < n; ++l) {
    const CellProps& cp = scratch.props[l];
    double row[2] = {(x[3 * l + 1] - n_old[2 * l]) / dt,
                     (x[3 * l + 2] - n_old[2 * l + 1]) / dt};
    double diag[9] = {0, 0, 0, 0, 1.0 / dt, 0, 0, 0, 1.0 / dt};

    for (int e = scope.inc_ptr[l]; e < scope.inc_ptr[l + 1]; ++e) {
      const int fi = scope.inc_face[e];
      const double sgn = scope.inc_sign[e];
      const FaceFluxResult& ff = scratch.face_flux[fi];
      row[0] += sgn * ff.flux[0];
      row[1] += sgn * ff.flux[1];
      if (!with_jac) continue;
      const bool is_a = scope.inc_sign[e] > 0;
      const auto& own = is_a ? ff.da : ff.db;
      const auto& oth = is_a ? ff.db : ff.da;
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 3; ++m) diag[3 * (i + 1) + m] += sgn * own[i][m];
      double* ob = J->block(pattern->inc_entry[e]);
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 3; ++m) ob[3 * (i + 1) + m] += sgn * wn * oth[i][m];
    }

    for (int e = scope.binc_ptr[l]; e < scope.binc_ptr[l + 1]; ++e) {
      const int fi = scope.binc_face[e];
      const ScopeBoundaryFace& bf = scope.boundary[fi];
      const double sgn = bf.interior_is_a ? 1.0 : -1.0;
      if (scope.bc == BoundaryKind::fixed_component_flux) {
        row[0] += sgn * bf.flux[0];
        row[1] += sgn * bf.flux[1];
        continue;  // frozen flux: no derivative contribution
      }
      const FaceFluxResult& ff = scratch.bface_flux[fi];
      row[0] += sgn * ff.flux[0];
      row[1] += sgn * ff.flux[1];
      if (!with_jac) continue;
      const auto& own = bf.interior_is_a ? ff.da : ff.db;
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 3; ++m) diag[3 * (i + 1) + m] += sgn * own[i][m];
    }

    for (int e = scope.perf_ptr[l]; e < scope.perf_ptr[l + 1]; ++e) {
      const auto& [si, p] = scope.perf_ref[e];
      const PerfRate& pr = scratch.perf_rates[si][p];
      row[0] += pr.q[0];
      row[1] += pr.q[1];
      if (!with_jac) continue;
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 3; ++m) diag[3 * (i + 1) + m] += pr.dq_dx[i][m];
      if (!scratch.chain_active[si]) continue;
      // Bottom-hole pressure chain: this perforation's rates react to the
      // unknowns of every perforated cell of the well. Writes stay within
      // row l, so the parallel gather stays race-free.
      const auto& chain = scratch.well_chain[si];
      const auto& entry = pattern->well_entry[si];
      const int np = static_cast<int>(chain.size());
      for (int q = 0; q < np; ++q) {
        if (q == p) {
          for (int i = 0; i < 2; ++i)
            for (int m = 0; m < 3; ++m)
              diag[3 * (i + 1) + m] += pr.dq_dpbh[i] * chain[q][m];
        } else {
          double* ob = J->block(entry[p * np + q]);
          for (int i = 0; i < 2; ++i)
            for (int m = 0; m < 3; ++m)
              ob[3 * (i + 1) + m] += pr.dq_dpbh[i] * chain[q][m] * wn;
        }
      }
    }

    F[3 * l] = cp.fv * wv;
    F[3 * l + 1] = row[0] * wn;
    F[3 * l + 2] = row[1] * wn;
    if (with_jac) {
      double* d = J->block(J->diag[l]);
      d[0] = cp.fv_dp * wv;
      d[1] = cp.fv_dn[0] * wv;
      d[2] = cp.fv_dn[1] * wv;
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 3; ++m) d[3 * (i + 1) + m] = diag[3 * (i + 1) + m] * wn;
    }
  }
  return true;
}

}  // namespace

bool assemble_system(const ProblemScope& scope, const Grid& grid,
                     const FluidParams& par, const std::vector<Well>& wells,
                     const Vec& x, const Vec& n_old, double dt,
                     BlockCsrMatrix* J, const ScopePattern* pattern,
                     Vec& F, AssemblyScratch& scratch,
                     const std::vector<WellState>* fixed_wells) {
  return assemble_impl(scope, grid, par, wells, x, n_old, dt, J, pattern, F,
                       scratch, fixed_wells, true);
}

namespace serial_ref {
bool assemble_system(const ProblemScope& scope, const Grid& grid,
                     const FluidParams& par, const std::vector<Well>& wells,
                     const Vec& x, const Vec& n_old, double dt,
                     BlockCsrMatrix* J, const ScopePattern* pattern,
                     Vec& F, AssemblyScratch& scratch,
                     const std::vector<WellState>* fixed_wells) {
  return assemble_impl(scope, grid, par, wells, x, n_old, dt, J, pattern, F,
                       scratch, fixed_wells, false);
}
}  // namespace serial_ref

}  // namespace addm
