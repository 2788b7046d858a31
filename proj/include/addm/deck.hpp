#pragma once

#include <optional>
#include <string>
#include <vector>

#include "addm/fluid.hpp"
#include "addm/grid.hpp"
#include "addm/timeloop.hpp"
#include "addm/wells.hpp"

namespace addm {

// Input deck: a line-oriented block format.
//   key = value [value ...]     one assignment per line
//   block {                     nested blocks; 'well NAME {' inside wells
//   }
// '#' starts a comment. Unknown keys or blocks are errors with line numbers.

struct PermSpec {
  std::string kind = "uniform";  // uniform | layered | gaussian_layers
  std::vector<double> kh = {100.0};  // mD; one value per band
  std::vector<int> bands;            // layers per band, top down; sums to nz
  double kv_ratio = 0.1;             // kz = kv_ratio * kh
  double stddev_frac = 0.3;          // gaussian_layers scatter
  double min_kh = 1.0;               // truncation floor, mD
  unsigned long long seed = 12345;
};

struct GridSpec {
  int nx = 1, ny = 1, nz = 1;
  double dx = 20, dy = 20, dz = 10;  // ft
  double top_depth = 8000;           // ft
  double porosity = 0.3;
  PermSpec perm;
};

struct WellSpec {
  std::string name;
  std::string kind = "producer";    // producer | injector
  std::string component = "oil";    // oil | gas
  int i = 0, j = 0;
  int k_from = 0, k_to = 0;
  double radius = 0.25;
  double skin = 0;
  std::string control = "molar_rate";  // molar_rate | surface_rate | bhp
  double target = 0;
  std::optional<double> bhp_limit;
};

struct ScheduleSpec {
  double end = 200;                  // days
  double report_interval = 0;        // 0 when report_times given
  std::vector<double> report_times;  // ascending, materialized by echo
};

struct OutputSpec {
  bool snapshots = false;
};

struct Deck {
  std::string title;
  GridSpec grid;
  FluidParams fluid;
  std::vector<WellSpec> wells;
  SolverConfig solver;
  ScheduleSpec schedule;
  OutputSpec output;
};

Deck parse_deck(const std::string& text);
Deck parse_deck_file(const std::string& path);

// Canonical text form with defaults materialized; parsing it reproduces the
// same deck (and the same echo).
std::string echo_deck(const Deck& deck);

// Realizes the grid including the permeability field (seeded and
// reproducible for the random kinds).
Grid build_grid(const GridSpec& spec);

std::vector<Well> build_wells(const Deck& deck, const Grid& grid);

// Explicit ascending report times ending exactly at schedule end.
std::vector<double> schedule_report_times(const ScheduleSpec& spec);

}  // namespace addm
