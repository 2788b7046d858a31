#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "addm/fluid.hpp"
#include "addm/grid.hpp"
#include "addm/linalg.hpp"
#include "addm/wells.hpp"

namespace addm {

// Treatment of faces crossing a region boundary during a local solve:
// exterior state frozen at the start-of-step state, either as a full frozen
// neighbor (upwinded flux against it) or as a constant cached flux.
enum class BoundaryKind { dirichlet_pressure, fixed_component_flux };

struct FaceFluxResult {
  double flux[2] = {0, 0};  // lb-mol/day, positive a -> b
  double da[2][3] = {{0, 0, 0}, {0, 0, 0}};  // d flux_i / d (P,No,Ng) of a
  double db[2][3] = {{0, 0, 0}, {0, 0, 0}};
};

// Two-point upwinded component flux between two evaluated cells.
// trans: geometric transmissibility (mD*ft); dz = depth(a) - depth(b).
FaceFluxResult component_face_flux(const FluidParams& par, double trans,
                                   double dz, const CellProps& a,
                                   const CellProps& b,
                                   bool with_derivs = true);

// Convenience overload for a grid face and a full state.
FaceFluxResult component_face_flux(const Grid& grid, const Face& face,
                                   const FluidParams& par,
                                   const FluidState& state);

struct ScopeFace {
  int la = -1, lb = -1;  // local cells
  double trans = 0;
  double dz = 0;  // depth(a) - depth(b)
};

struct ScopeBoundaryFace {
  int lcell = -1;          // local interior cell
  bool interior_is_a = true;
  int ext_cell = -1;       // global id of the frozen exterior cell
  double trans = 0;
  double dz = 0;           // grid-face orientation: depth(a) - depth(b)
  CellProps ext;           // frozen exterior properties
  double flux[2] = {0, 0}; // cached flux in grid-face orientation
};

// A cell set being solved implicitly: the whole domain or a coupled region.
// Unknown/equation rows follow `cells` order (ascending global ids).
struct ProblemScope {
  std::vector<int> cells;
  std::vector<int> local_of;  // per global cell, -1 outside
  BoundaryKind bc = BoundaryKind::dirichlet_pressure;
  bool whole_domain = false;

  std::vector<ScopeFace> faces;
  std::vector<ScopeBoundaryFace> boundary;
  std::vector<int> well_ids;  // wells whose perforations lie inside

  // Gather structures: per local cell, incident interior faces with
  // orientation sign, incident boundary faces, and perforations.
  std::vector<int> inc_ptr, inc_face;
  std::vector<std::int8_t> inc_sign;  // +1 when the cell is side a
  std::vector<int> binc_ptr, binc_face;
  std::vector<int> perf_ptr;
  std::vector<std::pair<int, int>> perf_ref;  // (index into well_ids, perf)

  int n() const { return static_cast<int>(cells.size()); }
};

ProblemScope make_scope(const Grid& grid, std::vector<int> cells,
                        BoundaryKind bc, const std::vector<Well>& wells);

ProblemScope make_global_scope(const Grid& grid,
                               const std::vector<Well>& wells);

// Freeze the exterior at the start-of-step state: evaluates exterior cell
// properties (dirichlet) or caches boundary component fluxes (fixed flux).
void snapshot_boundary(ProblemScope& scope, const Grid& grid,
                       const FluidParams& par, const FluidState& state_n);

// Restriction of a full state to scope unknown ordering [P,No,Ng] per cell.
void restrict_state(const ProblemScope& scope, const FluidState& s, Vec& x);
// Scatter scope unknowns back into a full state.
void prolong_state(const ProblemScope& scope, const Vec& x, FluidState& s);

// Jacobian sparsity for the scope: diagonal, interior-face neighbors, and
// all perforation-cell pairs of each rate-controlled well (the eliminated
// bottom-hole pressure couples every perforation to every other one).
// Entry index tables let the parallel gather write without searching.
struct ScopePattern {
  BlockCsrMatrix matrix;           // values zeroed
  std::vector<int> inc_entry;      // J entry of (cell, other) per incidence
  // Per scope well: np*np entries, [p * np + q] = J entry of
  // (cell of perf p, cell of perf q).
  std::vector<std::vector<int>> well_entry;
};
ScopePattern build_pattern(const ProblemScope& scope,
                           const std::vector<Well>& wells);

struct WellTotals {
  std::array<double, 2> q{0, 0};  // lb-mol/day, production positive
  bool crossflow = false;
  bool shut = false;
};

struct AssemblyScratch {
  std::vector<CellProps> props;
  std::vector<FaceFluxResult> face_flux;
  std::vector<FaceFluxResult> bface_flux;
  std::vector<WellState> well_states;
  std::vector<std::vector<PerfRate>> perf_rates;  // per scope well
  std::vector<WellTotals> well_totals;            // per scope well
  // Sensitivity of the eliminated bottom-hole pressure to the unknowns of
  // each perforated cell, d p_bh / d (P,No,Ng); empty when the well holds a
  // fixed bottom-hole pressure (chain_active[si] == 0).
  std::vector<std::vector<std::array<double, 3>>> well_chain;
  std::vector<char> chain_active;
  int bad_cell = -1;  // global id of the first failed evaluation
};

// Residual (and optionally Jacobian) of the scope at unknowns x, previous
// moles n_old (2 per scope cell), step size dt (days). Rows are scaled
// dimensionless: volume row by 1/pore-volume, conservation rows by
// dt/pore-volume. Well bottom-hole pressures are re-resolved from x unless
// fixed_wells is given; for rate-controlled wells the Jacobian includes the
// resulting d p_bh / dx coupling across perforations. `pattern` supplies the
// entry maps and must match J; it may be null when J is null. Returns false
// on an evaluation failure.
bool assemble_system(const ProblemScope& scope, const Grid& grid,
                     const FluidParams& par, const std::vector<Well>& wells,
                     const Vec& x, const Vec& n_old, double dt,
                     BlockCsrMatrix* J, const ScopePattern* pattern,
                     Vec& F, AssemblyScratch& scratch,
                     const std::vector<WellState>* fixed_wells = nullptr);

namespace serial_ref {
// Straight-loop reference assembly (no OpenMP), same contract.
bool assemble_system(const ProblemScope& scope, const Grid& grid,
                     const FluidParams& par, const std::vector<Well>& wells,
                     const Vec& x, const Vec& n_old, double dt,
                     BlockCsrMatrix* J, const ScopePattern* pattern,
                     Vec& F, AssemblyScratch& scratch,
                     const std::vector<WellState>* fixed_wells = nullptr);
}  // namespace serial_ref

}  // namespace addm
