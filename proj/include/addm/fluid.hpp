#pragma once

#include <array>
#include <vector>

#include "addm/types.hpp"

namespace addm {

// Corey-type relative permeability with residual saturations and endpoint
// scaling. Values are clamped into [0, kr_max]; the one-sided derivative is
// used at the clamp boundaries.
struct CoreyRelPerm {
  std::array<double, 2> exponent{2.0, 2.0};  // oil, gas
  std::array<double, 2> kr_max{1.0, 1.0};
  double s_or = 0.0;  // residual oil
  double s_gr = 0.0;  // residual gas
};

// Piecewise-linear gas-oil capillary pressure vs gas saturation. Empty table
// means zero capillary pressure. Evaluation clamps outside the node range.
struct PcTable {
  std::vector<double> sg;  // ascending
  std::vector<double> pc;  // psi
  bool empty() const { return sg.empty(); }
};

struct FluidParams {
  std::array<double, 2> xi_ref{0.75, 0.05};          // lb-mol/ft^3 at p_ref
  std::array<double, 2> compressibility{1e-5, 5e-4}; // 1/psi
  std::array<double, 2> viscosity{1.0, 0.02};        // cp
  std::array<double, 2> molar_mass{40.0, 16.0};      // lb/lb-mol
  std::array<double, 2> surface_molar_density{0.75, 0.05};  // lb-mol/ft^3
  double rock_compressibility = 4e-6;                // 1/psi
  double p_ref = 4800.0;                             // psi
  double p_init = 4800.0;                            // psi
  CoreyRelPerm relperm;
  PcTable pc_gas;
  bool gravity_on = true;
  UnitConstants units;
};

// Primary unknowns per cell: pressure (psi) and per-component moles (lb-mol).
struct FluidState {
  std::vector<double> pressure;
  std::vector<double> moles;  // [2c + comp]

  int num_cells() const { return static_cast<int>(pressure.size()); }
  double n(int cell, int comp) const { return moles[2 * cell + comp]; }
  double& n(int cell, int comp) { return moles[2 * cell + comp]; }
};

struct ScalarWithDp {
  double value = 0;
  double d_p = 0;
};

// Slightly compressible molar density xi_j(P); value <= 0 is an evaluation
// failure surfaced to the caller.
ScalarWithDp phase_molar_density(const FluidParams& p, int phase, double P);

// Pressure-dependent pore volume of one cell (rock compressibility applied to
// the reference pore volume, i.e. bulk volume times reference porosity).
ScalarWithDp pore_volume(const FluidParams& p, double ref_pore_volume, double P);

struct Saturations {
  double s[2] = {0, 0};
  double vf = 0;             // fluid volume, ft^3
  double ds_dp[2] = {0, 0};
  double ds_dn[2][2] = {{0, 0}, {0, 0}};  // ds[j]/dN[i]
  double vf_dp = 0;
  double vf_dn[2] = {0, 0};
  bool ok = false;
};

// Saturations from (P, N). Fails when all moles are zero or a molar density
// is non-positive.
Saturations saturations_from_state(const FluidParams& p, double P,
                                   const double* n_comp);

struct RelPermValue {
  double kr[2] = {0, 0};
  double dkr_ds[2] = {0, 0};  // derivative w.r.t. the phase's own saturation
};

RelPermValue rel_perm(const CoreyRelPerm& c, double s_oil, double s_gas);

// Capillary pressure of the gas phase vs its saturation (reference phase oil
// has zero capillary pressure).
ScalarWithDp gas_capillary_pressure(const PcTable& t, double s_gas);

// Everything assembly needs per cell, evaluated once per residual evaluation.
struct CellProps {
  double p = 0;
  double xi[2], xi_dp[2];
  double vp, vp_dp;
  double s[2], s_dp[2], s_dn[2][2];
  double kr[2], kr_ds[2];
  double pc[2], pc_ds[2];              // per phase; oil entry is zero
  double lam[2], lam_dp[2], lam_dn[2][2];  // mobility kr*xi/mu
  double rho[2], rho_dp[2];            // mass density, lb/ft^3
  double fv, fv_dp, fv_dn[2];          // volume-balance residual row, ft^3
  bool ok = false;
};

CellProps eval_cell_props(const FluidParams& p, double ref_pore_volume, double P,
                          const double* n_comp);

// Initial state: uniform pressure, all oil, fluid volume = pore volume.
FluidState initial_state(const FluidParams& p, double ref_pore_volume, int n_cells);

}  // namespace addm
