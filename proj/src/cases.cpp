#include "addm/cases.hpp"

#include <cmath>

namespace addm {

namespace {

struct Scale {
  const char* name;
  int nx, ny, nz;
  int tiles;
};

const Scale kScales[] = {
    {"tiny", 24, 24, 3, 3},
    {"small", 48, 48, 6, 4},
    {"medium", 96, 96, 6, 6},
};

const Scale& find_scale(const std::string& s) {
  for (const Scale& sc : kScales)
    if (s == sc.name) return sc;
  throw ConfigError("unknown case scale '" + s +
                    "' (expected tiny, small or medium)");
}

// Proportional band split: roughly 20% / 30% / 50% of the layers, at least
// one layer each.
std::vector<int> band_split(int nz) {
  if (nz < 3) throw ConfigError("built-in cases need nz >= 3");
  int b1 = std::max(1, static_cast<int>(std::lround(0.2 * nz)));
  int b2 = std::max(b1 + 1, static_cast<int>(std::lround(0.5 * nz)));
  if (b2 >= nz) b2 = nz - 1;
  return {b1, b2 - b1, nz - b2};
}

WellSpec corner_injector(const std::string& name, int i, int j, int k_to,
                         double rate, double bhp_max) {
  WellSpec w;
  w.name = name;
  w.kind = "injector";
  w.component = "gas";
  w.i = i;
  w.j = j;
  w.k_from = 0;
  w.k_to = k_to;
  w.control = "molar_rate";
  w.target = rate;
  w.bhp_limit = bhp_max;
  return w;
}

}  // namespace

Deck builtin_case(const std::string& spec, unsigned long long seed) {
  const size_t colon = spec.find(':');
  const std::string base = spec.substr(0, colon);
  const std::string scale_name =
      colon == std::string::npos ? "small" : spec.substr(colon + 1);
  if (base != "case1-mini" && base != "case2-mini")
    throw ConfigError("unknown case '" + base +
                      "' (expected case1-mini or case2-mini)");
  const Scale& sc = find_scale(scale_name);

  Deck d;
  d.title = base + ":" + sc.name;

  d.grid.nx = sc.nx;
  d.grid.ny = sc.ny;
  d.grid.nz = sc.nz;
  d.grid.dx = d.grid.dy = 20;
  d.grid.dz = 10;
  d.grid.top_depth = 8000;
  d.grid.porosity = 0.3;
  d.grid.perm.kind = base == "case1-mini" ? "layered" : "gaussian_layers";
  d.grid.perm.kh = {500, 50, 200};
  d.grid.perm.bands = band_split(sc.nz);
  d.grid.perm.kv_ratio = 0.1;
  d.grid.perm.stddev_frac = 0.3;
  d.grid.perm.min_kh = 1.0;
  d.grid.perm.seed = seed;

  d.fluid.relperm.exponent = {2.0, 2.0};
  d.fluid.relperm.kr_max = {1.0, 0.9};
  d.fluid.relperm.s_or = 0.2;
  d.fluid.relperm.s_gr = 0.05;

  // Rates scale with pore volume: gas injection displaces 0.1% of the pore
  // volume per day, production draws 90% of that volume back as oil.
  const double pv = static_cast<double>(sc.nx) * sc.ny * sc.nz * d.grid.dx *
                    d.grid.dy * d.grid.dz * d.grid.porosity;
  const double gas_vol_rate = 1e-3 * pv;  // ft^3/day at reservoir conditions
  const double inj_rate = 0.25 * gas_vol_rate * d.fluid.xi_ref[kGas];
  const double prod_rate = 0.9 * gas_vol_rate * d.fluid.xi_ref[kOil];

  const std::vector<int> bands = d.grid.perm.bands;
  const int top_k_to = bands[0] - 1;
  const int bottom_k_from = bands[0] + bands[1];
  d.wells.push_back(
      corner_injector("INJ-SW", 0, 0, top_k_to, inj_rate, 9500));
  d.wells.push_back(
      corner_injector("INJ-SE", sc.nx - 1, 0, top_k_to, inj_rate, 9500));
  d.wells.push_back(
      corner_injector("INJ-NW", 0, sc.ny - 1, top_k_to, inj_rate, 9500));
  d.wells.push_back(corner_injector("INJ-NE", sc.nx - 1, sc.ny - 1, top_k_to,
                                    inj_rate, 9500));
  WellSpec prod;
  prod.name = "PROD-C";
  prod.kind = "producer";
  prod.component = "oil";
  prod.i = sc.nx / 2;
  prod.j = sc.ny / 2;
  prod.k_from = bottom_k_from;
  prod.k_to = sc.nz - 1;
  prod.control = "molar_rate";
  prod.target = prod_rate;
  prod.bhp_limit = 1500;
  d.wells.push_back(prod);

  d.solver.tiles_x = d.solver.tiles_y = sc.tiles;
  d.schedule.end = 200;
  d.schedule.report_interval = 20;
  return d;
}

std::vector<std::string> builtin_case_names() {
  std::vector<std::string> names;
  for (const char* base : {"case1-mini", "case2-mini"})
    for (const Scale& sc : kScales)
      names.push_back(std::string(base) + ":" + sc.name);
  return names;
}

}  // namespace addm
