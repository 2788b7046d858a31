#include "addm/wells.hpp"

#include <algorithm>
#include <cmath>

namespace addm {

double peaceman_index(double dx, double dy, double dz, double kx, double ky,
                      double r_w, double skin) {
  if (kx <= 0 || ky <= 0) throw ConfigError("well cell permeability must be positive");
  if (r_w <= 0) throw ConfigError("well radius must be positive");
  const double kr = ky / kx;
  const double r_eq = 0.28 *
                      std::sqrt(std::sqrt(kr) * dx * dx + dy * dy / std::sqrt(kr)) /
                      (std::pow(kr, 0.25) + std::pow(1.0 / kr, 0.25));
  if (r_eq <= r_w)
    throw ConfigError("equivalent radius does not exceed well radius");
  const double denom = std::log(r_eq / r_w) + skin;
  if (denom <= 0) throw ConfigError("negative skin makes well index singular");
  return 2.0 * M_PI * std::sqrt(kx * ky) * dz / denom;
}

double molar_target(const Well& w, const FluidParams& par) {
  switch (w.control.kind) {
    case ControlKind::molar_rate:
      return w.control.value;
    case ControlKind::surface_rate:
      return w.control.value * par.surface_molar_density[w.component];
    case ControlKind::bhp:
      return w.control.value;  // interpreted as a pressure by callers
  }
  return 0;
}

PerfRate perf_rate(const Well& w, const WellState& ws, const FluidParams& par,
                   double wi, double dz_perf, const CellProps& props) {
  PerfRate r;
  if (ws.shut) return r;
  const double cwi = wi * par.units.darcy;
  const double p_wf = ws.p_bh + ws.gamma * dz_perf;
  if (w.kind == WellKind::producer) {
    const double dd = props.p - p_wf;  // drawdown toward the well
    if (dd <= 0) {
      r.crossflow = dd < 0;
      return r;
    }
    for (int i = 0; i < 2; ++i) {
      r.q[i] = cwi * props.lam[i] * dd;
      r.dq_dx[i][0] = cwi * (props.lam_dp[i] * dd + props.lam[i]);
      r.dq_dx[i][1] = cwi * props.lam_dn[i][0] * dd;
      r.dq_dx[i][2] = cwi * props.lam_dn[i][1] * dd;
      r.dq_dpbh[i] = -cwi * props.lam[i];
    }
  } else {
    const double dd = p_wf - props.p;  // drive into the formation
    if (dd <= 0) {
      r.crossflow = dd < 0;
      return r;
    }
    const double lam_t = props.lam[kOil] + props.lam[kGas];
    const int ic = w.component;
    r.q[ic] = -cwi * lam_t * dd;  // injection: negative production
    r.dq_dx[ic][0] =
        -cwi * ((props.lam_dp[kOil] + props.lam_dp[kGas]) * dd - lam_t);
    r.dq_dx[ic][1] = -cwi * (props.lam_dn[kOil][0] + props.lam_dn[kGas][0]) * dd;
    r.dq_dx[ic][2] = -cwi * (props.lam_dn[kOil][1] + props.lam_dn[kGas][1]) * dd;
    r.dq_dpbh[ic] = -cwi * lam_t;
  }
  return r;
}

namespace {

// Total target-component flow of the well at a candidate p_bh, with crossflow
// clamping. Positive in the "useful" direction for both well kinds.
double clamped_flow(const Well& w, const FluidParams& par,
                    const std::vector<double>& wi,
                    const std::vector<double>& dz,
                    const std::vector<CellProps>& props, double gamma,
                    double p_bh) {
  double total = 0;
  const int n = static_cast<int>(props.size());
  for (int p = 0; p < n; ++p) {
    const double cwi = wi[p] * par.units.darcy;
    const double p_wf = p_bh + gamma * dz[p];
    if (w.kind == WellKind::producer) {
      const double dd = props[p].p - p_wf;
      if (dd > 0) total += cwi * props[p].lam[w.component] * dd;
    } else {
      const double dd = p_wf - props[p].p;
      const double lam_t = props[p].lam[kOil] + props[p].lam[kGas];
      if (dd > 0) total += cwi * lam_t * dd;
    }
  }
  return total;
}

}  // namespace

WellState resolve_control(const Well& w, const FluidParams& par,
                          const std::vector<double>& wi,
                          const std::vector<double>& dz_perf,
                          const std::vector<CellProps>& props,
                          double molar_target_or_bhp) {
  WellState ws;
  // Wellbore gradient from the reference perforation's phase mixture.
  const CellProps& ref = props.front();
  double rho_mix = 0;
  for (int j = 0; j < 2; ++j) rho_mix += ref.s[j] * ref.rho[j];
  ws.gamma = par.gravity_on ? rho_mix * par.units.gravity : 0.0;

  if (w.control.kind == ControlKind::bhp) {
    ws.p_bh = molar_target_or_bhp;
    ws.bhp_mode = true;
    for (std::size_t p = 0; p < props.size(); ++p) {
      const double p_wf = ws.p_bh + ws.gamma * dz_perf[p];
      const bool cross = (w.kind == WellKind::producer) ? props[p].p < p_wf
                                                        : props[p].p > p_wf;
      ws.crossflow_flagged = ws.crossflow_flagged || cross;
    }
    return ws;
  }

  const double target = molar_target_or_bhp;
  const int n = static_cast<int>(props.size());

  // Unclamped closed form: sum_p c_p * (sign * (P_p - gamma*dz_p - p_bh)) = target.
  double a = 0, b = 0;  // flow = a - b * p_bh for producers; b * p_bh - a for injectors
  for (int p = 0; p < n; ++p) {
    const double cwi = wi[p] * par.units.darcy;
    const double lam = (w.kind == WellKind::producer)
                           ? props[p].lam[w.component]
                           : props[p].lam[kOil] + props[p].lam[kGas];
    a += cwi * lam * (props[p].p - ws.gamma * dz_perf[p]);
    b += cwi * lam;
  }
  if (b <= 0) {
    // No mobility at any perforation: the target cannot be met.
    ws.shut = target > 0;
    ws.p_bh = props.front().p;
    return ws;
  }
  double p_bh = (w.kind == WellKind::producer) ? (a - target) / b
                                               : (a + target) / b;

  auto has_crossflow = [&](double pb) {
    for (int p = 0; p < n; ++p) {
      const double p_wf = pb + ws.gamma * dz_perf[p];
      const double dd = (w.kind == WellKind::producer) ? props[p].p - p_wf
                                                       : p_wf - props[p].p;
      if (dd < 0) return true;
    }
    return false;
  };

  if (has_crossflow(p_bh)) {
    ws.crossflow_flagged = true;
    // Monotone clamped problem: bracket, bisect, Newton polish. Flow is
    // unbounded in the favorable direction (some mobility exists since b > 0),
    // so a bracket always exists.
    // dir: direction of increasing clamped flow along p_bh.
    const double dir = (w.kind == WellKind::producer) ? -1.0 : 1.0;
    auto f = [&](double pb) {
      return clamped_flow(w, par, wi, dz_perf, props, ws.gamma, pb) - target;
    };
    double lo = p_bh, hi = p_bh;  // f(lo) >= 0 >= f(hi)
    double span = 100.0;
    while (f(lo) < 0) {
      lo += dir * span;
      span *= 2;
    }
    span = 100.0;
    while (f(hi) > 0) {
      hi -= dir * span;
      span *= 2;
    }
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) > 0)
        lo = mid;
      else
        hi = mid;
      if (std::abs(hi - lo) < 1e-10 * std::max(1.0, std::abs(mid))) break;
    }
    p_bh = 0.5 * (lo + hi);
    // Newton polish on the active perforation set.
    for (int it = 0; it < 4; ++it) {
      double flow = 0, slope = 0;
      for (int p = 0; p < n; ++p) {
        const double cwi = wi[p] * par.units.darcy;
        const double p_wf = p_bh + ws.gamma * dz_perf[p];
        const double lam = (w.kind == WellKind::producer)
                               ? props[p].lam[w.component]
                               : props[p].lam[kOil] + props[p].lam[kGas];
        const double dd = (w.kind == WellKind::producer) ? props[p].p - p_wf
                                                         : p_wf - props[p].p;
        if (dd > 0) {
          flow += cwi * lam * dd;
          slope += cwi * lam;  // |d flow / d p_bh| on the active set
        }
      }
      if (slope <= 0) break;
      p_bh -= dir * (flow - target) / slope;
    }
  }

  ws.p_bh = p_bh;
  // Rate control hits its BHP bound: switch mode and run at the bound.
  if (w.control.has_limit) {
    const bool violated = (w.kind == WellKind::producer)
                              ? p_bh < w.control.bhp_limit
                              : p_bh > w.control.bhp_limit;
    if (violated) {
      ws.p_bh = w.control.bhp_limit;
      ws.bhp_mode = true;
    }
  }
  return ws;
}

void attach_wells(std::vector<Well>& wells, const Grid& grid,
                  const SubdomainLayout* layout) {
  for (Well& w : wells) {
    if (w.i < 0 || w.i >= grid.dims.nx || w.j < 0 || w.j >= grid.dims.ny)
      throw ConfigError("well " + w.name + ": column outside grid");
    if (w.k_from < 0 || w.k_to >= grid.dims.nz || w.k_from > w.k_to)
      throw ConfigError("well " + w.name + ": bad layer range");
    w.cells.clear();
    w.wi.clear();
    for (int k = w.k_from; k <= w.k_to; ++k) {
      const int c = grid.cell_index(w.i, w.j, k);
      if (!grid.is_active(c))
        throw ConfigError("well " + w.name + ": perforates inactive cell");
      w.cells.push_back(c);
      w.wi.push_back(peaceman_index(grid.cell.dx, grid.cell.dy, grid.cell.dz,
                                    grid.perm[c].kx, grid.perm[c].ky, w.radius,
                                    w.skin));
    }
    if (layout) {
      const int s = layout->owner[w.cells.front()];
      for (int c : w.cells)
        if (layout->owner[c] != s)
          throw ConfigError("well " + w.name +
                            ": perforations span multiple subdomains");
    }
  }
  // Two wells in one cell would need rate splitting we do not model.
  std::vector<int> seen;
  for (const Well& w : wells)
    for (int c : w.cells) seen.push_back(c);
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw ConfigError("two wells perforate the same cell");
}

}  // namespace addm
