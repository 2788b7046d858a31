#pragma once

#include <string>
#include <vector>

#include "addm/coupling.hpp"
#include "addm/fluid.hpp"
#include "addm/grid.hpp"

namespace addm {

// One report-time row. Iteration counters are cumulative over the run so far;
// the DDM columns count decomposition-stage Newton iterations, the W columns
// iterations wasted on rejected attempts.
struct ReportRow {
  double time = 0;  // days
  double fpr = 0;   // pore-volume-weighted field pressure, psi
  double fgpr = 0;  // field gas production rate, lb-mol/day
  double fopr = 0;  // field oil production rate, lb-mol/day
  long nr = 0;
  long ls = 0;
  long nrw = 0;
  long nr_ddm = 0;
  long nrw_ddm = 0;
};

// Deterministic CSV (fixed header, %.10g numbers): byte-identical output for
// identical runs regardless of worker count.
std::string report_csv(const std::vector<ReportRow>& rows);

double field_pressure(const Grid& grid, const FluidParams& par,
                      const FluidState& s);

// Legacy-format VTK structured-points snapshot with pressure, gas
// saturation, the latest gas saturation change, subdomain and region ids.
// `pattern` may be null (no decomposition stage); `delta` may be empty.
std::string vtk_snapshot(const std::string& title, const Grid& grid,
                         const FluidParams& par, const FluidState& s,
                         const Vec& delta, const SubdomainLayout& layout,
                         const CouplingPattern* pattern);

// subdomain,region,independent per line.
std::string coupling_csv(const CouplingPattern& pattern);

}  // namespace addm
