#pragma once

#include <string>
#include <vector>

#include "addm/fluid.hpp"
#include "addm/grid.hpp"
#include "addm/types.hpp"

namespace addm {

enum class WellKind { injector, producer };

enum class ControlKind { molar_rate, surface_rate, bhp };

struct WellControl {
  ControlKind kind = ControlKind::molar_rate;
  double value = 0;   // lb-mol/day, ft^3/day at surface, or psi
  // BHP bound guarding the rate control: lower bound for producers, upper
  // bound for injectors. Control switches to BHP at the bound when violated.
  double bhp_limit = 0;
  bool has_limit = false;
};

// A vertical well perforating a contiguous k-range of one (i, j) column.
struct Well {
  std::string name;
  WellKind kind = WellKind::producer;
  int component = kOil;      // injected component, or rate-target component
  int i = 0, j = 0;          // column
  int k_from = 0, k_to = 0;  // inclusive layer range, top to bottom
  double radius = 0.25;      // ft
  double skin = 0;
  WellControl control;

  std::vector<int> cells;  // resolved perforated cell ids, top-down
  std::vector<double> wi;  // Peaceman index per perforation, mD*ft
};

// Per-iteration resolved wellbore state. Frozen while one Jacobian is
// assembled; recomputed at every residual evaluation.
struct WellState {
  double p_bh = 0;               // at the reference (topmost) perforation
  double gamma = 0;              // wellbore gradient, psi/ft
  bool bhp_mode = false;         // true when running on the BHP bound/target
  bool shut = false;             // no feasible p_bh (e.g. zero mobility)
  bool crossflow_flagged = false;
};

// Peaceman well index, geometric part in mD*ft (flow coefficient applied by
// the caller alongside face transmissibilities).
double peaceman_index(double dx, double dy, double dz, double kx, double ky,
                      double r_w, double skin);

struct PerfRate {
  double q[2] = {0, 0};            // lb-mol/day, production positive
  double dq_dx[2][3] = {{0, 0, 0}, {0, 0, 0}};  // d q_i / d (P, No, Ng) of the cell
  double dq_dpbh[2] = {0, 0};
  bool crossflow = false;          // clamped to zero flow
};

// Source terms of one perforation at fixed WellState. props belongs to the
// perforated cell; wi is its Peaceman index; dz_perf = depth(perf) - depth(ref).
PerfRate perf_rate(const Well& w, const WellState& ws, const FluidParams& par,
                   double wi, double dz_perf, const CellProps& props);

// Resolve the control to a bottom-hole pressure against frozen cell
// properties. Rate targets solve sum_p flow(p_bh) = target (monotone;
// closed form when no perforation crossflows, else bisection + Newton
// polish). BHP bounds switch the mode; an unreachable target shuts the well.
WellState resolve_control(const Well& w, const FluidParams& par,
                          const std::vector<double>& wi,
                          const std::vector<double>& dz_perf,
                          const std::vector<CellProps>& props,
                          double molar_target_or_bhp);

// Deck-level target converted to molar units (surface rate * surface density).
double molar_target(const Well& w, const FluidParams& par);

// Validation performed at setup: single column, contiguous active cells,
// inside the grid, perforated cells in exactly one subdomain.
void attach_wells(std::vector<Well>& wells, const Grid& grid,
                  const SubdomainLayout* layout);

}  // namespace addm
