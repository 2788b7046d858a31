#include "addm/report.hpp"

#include <cstdio>
#include <sstream>

namespace addm {

namespace {

std::string g10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream o;
  o << "time_days,FPR_psi,FGPR_lbmolday,FOPR_lbmolday,NRiter,LSiter,"
       "LS_per_NR,NRiterW,NRiter_DDM,NRiterW_DDM\n";
  for (const ReportRow& r : rows) {
    const double per = r.nr > 0 ? static_cast<double>(r.ls) / r.nr : 0.0;
    o << g10(r.time) << ',' << g10(r.fpr) << ',' << g10(r.fgpr) << ','
      << g10(r.fopr) << ',' << r.nr << ',' << r.ls << ',' << g10(per) << ','
      << r.nrw << ',' << r.nr_ddm << ',' << r.nrw_ddm << '\n';
  }
  return o.str();
}

double field_pressure(const Grid& grid, const FluidParams& par,
                      const FluidState& s) {
  (void)par;
  const double pv = grid.pore_volume_ref();
  double wsum = 0, psum = 0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    if (!grid.is_active(c)) continue;
    wsum += pv;
    psum += pv * s.pressure[c];
  }
  return wsum > 0 ? psum / wsum : 0.0;
}

std::string vtk_snapshot(const std::string& title, const Grid& grid,
                         const FluidParams& par, const FluidState& s,
                         const Vec& delta, const SubdomainLayout& layout,
                         const CouplingPattern* pattern) {
  std::ostringstream o;
  const int nc = grid.num_cells();
  o << "# vtk DataFile Version 3.0\n"
    << title << "\nASCII\nDATASET STRUCTURED_POINTS\n"
    << "DIMENSIONS " << grid.dims.nx << ' ' << grid.dims.ny << ' '
    << grid.dims.nz << "\nORIGIN 0 0 0\nSPACING " << g10(grid.cell.dx) << ' '
    << g10(grid.cell.dy) << ' ' << g10(grid.cell.dz) << "\nPOINT_DATA " << nc
    << "\n";

  o << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) o << g10(s.pressure[c]) << "\n";

  o << "SCALARS s_gas double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) {
    double sg = 0;
    if (grid.is_active(c)) {
      const Saturations sat =
          saturations_from_state(par, s.pressure[c], &s.moles[2 * c]);
      if (sat.ok) sg = sat.s[kGas];
    }
    o << g10(sg) << "\n";
  }

  o << "SCALARS ds_gas double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) {
    const double d = delta.empty() ? 0.0 : delta[2 * c + kGas];
    o << g10(d) << "\n";
  }

  o << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) o << layout.owner[c] << "\n";

  o << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) {
    const int own = layout.owner[c];
    const int reg = (pattern && own >= 0) ? pattern->region_of[own] : -1;
    o << reg << "\n";
  }
  return o.str();
}

std::string coupling_csv(const CouplingPattern& pattern) {
  std::ostringstream o;
  o << "subdomain,region,independent\n";
  for (int k = 0; k < pattern.n_subdomains; ++k)
    o << k << ',' << pattern.region_of[k] << ','
      << int(pattern.independent[k]) << '\n';
  return o.str();
}

}  // namespace addm
