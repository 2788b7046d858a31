#include "addm/fluid.hpp"

#include <algorithm>
#include <cmath>

namespace addm {

ScalarWithDp phase_molar_density(const FluidParams& p, int phase, double P) {
  ScalarWithDp r;
  r.d_p = p.xi_ref[phase] * p.compressibility[phase];
  r.value = p.xi_ref[phase] * (1.0 + p.compressibility[phase] * (P - p.p_ref));
  return r;
}

ScalarWithDp pore_volume(const FluidParams& p, double ref_pore_volume, double P) {
  ScalarWithDp r;
  r.d_p = ref_pore_volume * p.rock_compressibility;
  r.value = ref_pore_volume * (1.0 + p.rock_compressibility * (P - p.p_ref));
  return r;
}

Saturations saturations_from_state(const FluidParams& p, double P,
                                   const double* n_comp) {
  Saturations s;
  double xi[2], xi_dp[2];
  for (int j = 0; j < 2; ++j) {
    const auto d = phase_molar_density(p, j, P);
    if (d.value <= 0) return s;
    xi[j] = d.value;
    xi_dp[j] = d.d_p;
  }
  if (n_comp[0] <= 0 && n_comp[1] <= 0) return s;

  double pv[2], pv_dp[2];  // phase volumes N_j / xi_j
  for (int j = 0; j < 2; ++j) {
    pv[j] = n_comp[j] / xi[j];
    pv_dp[j] = -n_comp[j] * xi_dp[j] / (xi[j] * xi[j]);
  }
  s.vf = pv[0] + pv[1];
  s.vf_dp = pv_dp[0] + pv_dp[1];
  for (int i = 0; i < 2; ++i) s.vf_dn[i] = 1.0 / xi[i];
  if (s.vf <= 0) return s;

  for (int j = 0; j < 2; ++j) {
    s.s[j] = pv[j] / s.vf;
    s.ds_dp[j] = (pv_dp[j] * s.vf - pv[j] * s.vf_dp) / (s.vf * s.vf);
    for (int i = 0; i < 2; ++i) {
      const double dpv = (i == j) ? 1.0 / xi[j] : 0.0;
      s.ds_dn[j][i] = (dpv * s.vf - pv[j] * s.vf_dn[i]) / (s.vf * s.vf);
    }
  }
  s.ok = true;
  return s;
}

namespace {

// Corey curve for one phase: kr = kmax * t^n with t the normalized mobile
// saturation, clamped to [0,1]; one-sided derivative at the clamps.
void corey_one(double s, double s_res_own, double s_res_other, double n,
               double kmax, double& kr, double& dkr) {
  const double span = 1.0 - s_res_own - s_res_other;
  if (span <= 0) {
    kr = 0;
    dkr = 0;
    return;
  }
  double t = (s - s_res_own) / span;
  if (t <= 0) {
    kr = 0;
    dkr = 0;
    return;
  }
  if (t >= 1) {
    kr = kmax;
    dkr = 0;
    return;
  }
  kr = kmax * std::pow(t, n);
  dkr = kmax * n * std::pow(t, n - 1.0) / span;
}

}  // namespace

RelPermValue rel_perm(const CoreyRelPerm& c, double s_oil, double s_gas) {
  RelPermValue r;
  corey_one(s_oil, c.s_or, c.s_gr, c.exponent[kOil], c.kr_max[kOil], r.kr[kOil],
            r.dkr_ds[kOil]);
  corey_one(s_gas, c.s_gr, c.s_or, c.exponent[kGas], c.kr_max[kGas], r.kr[kGas],
            r.dkr_ds[kGas]);
  return r;
}

ScalarWithDp gas_capillary_pressure(const PcTable& t, double s_gas) {
  ScalarWithDp r;
  if (t.empty()) return r;
  const auto& x = t.sg;
  const auto& y = t.pc;
  const int n = static_cast<int>(x.size());
  if (n == 1 || s_gas <= x.front()) {
    r.value = y.front();
    return r;
  }
  if (s_gas >= x.back()) {
    r.value = y.back();
    return r;
  }
  int hi = static_cast<int>(std::upper_bound(x.begin(), x.end(), s_gas) -
                            x.begin());
  const int lo = hi - 1;
  const double w = (y[hi] - y[lo]) / (x[hi] - x[lo]);
  r.value = y[lo] + w * (s_gas - x[lo]);
  r.d_p = w;  // derivative w.r.t. s_gas (field reused)
  return r;
}

CellProps eval_cell_props(const FluidParams& p, double ref_pore_volume, double P,
                          const double* n_comp) {
  CellProps c;
  c.p = P;
  for (int j = 0; j < 2; ++j) {
    const auto d = phase_molar_density(p, j, P);
    c.xi[j] = d.value;
    c.xi_dp[j] = d.d_p;
    if (d.value <= 0) return c;
  }
  const auto vp = pore_volume(p, ref_pore_volume, P);
  c.vp = vp.value;
  c.vp_dp = vp.d_p;
  if (c.vp <= 0) return c;

  const auto sat = saturations_from_state(p, P, n_comp);
  if (!sat.ok) return c;
  for (int j = 0; j < 2; ++j) {
    c.s[j] = sat.s[j];
    c.s_dp[j] = sat.ds_dp[j];
    for (int i = 0; i < 2; ++i) c.s_dn[j][i] = sat.ds_dn[j][i];
  }

  const auto kr = rel_perm(p.relperm, c.s[kOil], c.s[kGas]);
  for (int j = 0; j < 2; ++j) {
    c.kr[j] = kr.kr[j];
    c.kr_ds[j] = kr.dkr_ds[j];
  }

  c.pc[kOil] = 0;
  c.pc_ds[kOil] = 0;
  const auto pc = gas_capillary_pressure(p.pc_gas, c.s[kGas]);
  c.pc[kGas] = pc.value;
  c.pc_ds[kGas] = pc.d_p;

  for (int j = 0; j < 2; ++j) {
    const double inv_mu = 1.0 / p.viscosity[j];
    c.lam[j] = c.kr[j] * c.xi[j] * inv_mu;
    c.lam_dp[j] =
        (c.kr_ds[j] * c.s_dp[j] * c.xi[j] + c.kr[j] * c.xi_dp[j]) * inv_mu;
    for (int i = 0; i < 2; ++i)
      c.lam_dn[j][i] = c.kr_ds[j] * c.s_dn[j][i] * c.xi[j] * inv_mu;
    c.rho[j] = c.xi[j] * p.molar_mass[j];
    c.rho_dp[j] = c.xi_dp[j] * p.molar_mass[j];
  }

  // Volume balance: pore volume minus fluid volume.
  c.fv = c.vp - sat.vf;
  c.fv_dp = c.vp_dp - sat.vf_dp;
  for (int i = 0; i < 2; ++i) c.fv_dn[i] = -sat.vf_dn[i];
  c.ok = true;
  return c;
}

FluidState initial_state(const FluidParams& p, double ref_pore_volume,
                         int n_cells) {
  FluidState st;
  st.pressure.assign(n_cells, p.p_init);
  st.moles.assign(2 * n_cells, 0.0);
  const double vp = pore_volume(p, ref_pore_volume, p.p_init).value;
  const double xi_o = phase_molar_density(p, kOil, p.p_init).value;
  for (int c = 0; c < n_cells; ++c) st.moles[2 * c + kOil] = vp * xi_o;
  return st;
}

}  // namespace addm
