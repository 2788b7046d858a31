#pragma once

#include <optional>
#include <string>
#include <vector>

#include "addm/deck.hpp"
#include "addm/report.hpp"
#include "addm/timeloop.hpp"

namespace addm {

struct RunOptions {
  std::optional<Method> method;  // overrides the deck's solver method
  int workers = 0;               // OpenMP threads, 0 keeps the default
  std::string out_dir;           // empty: no files written
  bool snapshots = false;        // force snapshots on
  std::optional<unsigned long long> seed;  // overrides the perm field seed
  // When set, the run must accept exactly these step end times (a recorded
  // adaptive run replayed by the other methods for like-for-like counters).
  const std::vector<double>* replay = nullptr;
};

struct RunStats {
  long nr = 0;        // accepted global Newton iterations
  long ls = 0;        // linear iterations inside accepted global solves
  long nrw = 0;       // global Newton iterations of rejected attempts
  long nr_ddm = 0;    // decomposition-stage Newton iterations (accepted)
  long nrw_ddm = 0;   // decomposition-stage iterations of rejected attempts
  long steps = 0;
  long attempts = 0;
  long local_failures = 0;
  double wall_seconds = 0;
  double wall_linear = 0;  // global-stage GMRES
  double wall_local = 0;   // decomposition stage
};

struct RunResult {
  Method method = Method::fim;
  std::vector<ReportRow> rows;
  RunStats stats;
  std::vector<double> accepted_times;
  FluidState final_state;
};

// Runs one deck to its schedule end. Writes reports_<METHOD>.csv (plus
// snapshots when enabled) under out_dir when given.
RunResult run_deck(const Deck& deck, const RunOptions& opt);

// Benchmark driver: an adaptive reference run first (FIM unless absent from
// `methods`), then the remaining methods replaying its accepted steps.
// Writes per-method CSVs and summary.txt under out_dir when given.
struct CompareResult {
  std::vector<RunResult> runs;
  std::string summary;
};
CompareResult run_compare(const Deck& deck, const RunOptions& opt,
                          std::vector<Method> methods);

std::string run_summary(const std::vector<RunResult>& runs);

}  // namespace addm
