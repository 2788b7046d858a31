// Benchmarks the OpenMP assembly and sparse matrix-vector kernels against
// their serial reference implementations and checks that the results are
// bit-identical (the parallel schedules are designed to be deterministic for
// any thread count).

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "addm/assembly.hpp"
#include "addm/cases.hpp"
#include "addm/runner.hpp"
#include "addm/timeloop.hpp"

using namespace addm;

namespace {

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool bytes_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         (a.empty() ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

int main(int argc, char** argv) {
  omp_set_max_active_levels(1);
  std::string case_name = "case1-mini:small";
  int reps = 20;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--case" && i + 1 < argc) case_name = argv[++i];
    else if (arg == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: bench_kernels [--case NAME] [--reps N]\n");
      return 1;
    }
  }

  const Deck deck = builtin_case(case_name);
  Grid grid = build_grid(deck.grid);
  std::vector<Well> wells = build_wells(deck, grid);
  SolverConfig cfg = deck.solver;
  Simulator sim(std::move(grid), deck.fluid, std::move(wells), cfg);

  // March a few steps so the state has moving saturation fronts.
  FluidState s = sim.make_initial_state();
  FluidState prev = s;
  double dt = cfg.dt.init, dt_prev = dt;
  for (int i = 0; i < 3; ++i) {
    FluidState out;
    const StepAttempt a = sim.advance(s, prev, dt, dt_prev, out);
    if (!a.accepted) break;
    prev = std::move(s);
    s = std::move(out);
    dt_prev = dt;
  }

  const ProblemScope& scope = sim.global_scope();
  const ScopePattern pattern = build_pattern(scope, sim.wells());
  const Vec n_old = restrict_moles(scope, prev);
  Vec x;
  restrict_state(scope, s, x);

  BlockCsrMatrix Jp = pattern.matrix, Js = pattern.matrix;
  Vec Fp(3 * scope.n()), Fs(3 * scope.n());
  AssemblyScratch scratch_p, scratch_s;

  std::printf("case %s: %d cells, %d threads\n", case_name.c_str(), scope.n(),
              omp_get_max_threads());

  double tp = now();
  for (int r = 0; r < reps; ++r)
    assemble_system(scope, sim.grid(), sim.params(), sim.wells(), x, n_old,
                    dt, &Jp, &pattern, Fp, scratch_p);
  tp = (now() - tp) / reps;

  double ts = now();
  for (int r = 0; r < reps; ++r)
    serial_ref::assemble_system(scope, sim.grid(), sim.params(), sim.wells(),
                                x, n_old, dt, &Js, &pattern, Fs,
                                scratch_s);
  ts = (now() - ts) / reps;

  const bool asm_ok = bytes_equal(Fp, Fs) && bytes_equal(Jp.val, Js.val);
  std::printf("assemble: parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  "
              "bit-identical: %s\n",
              1e3 * tp, 1e3 * ts, ts / tp, asm_ok ? "yes" : "NO");

  Vec yp(Fp.size()), ys(Fs.size());
  double sp = now();
  for (int r = 0; r < reps * 10; ++r) spmv(Jp, Fp, yp);
  sp = (now() - sp) / (reps * 10);
  double ss = now();
  for (int r = 0; r < reps * 10; ++r) serial_ref::spmv(Js, Fs, ys);
  ss = (now() - ss) / (reps * 10);

  const bool spmv_ok = bytes_equal(yp, ys);
  std::printf("spmv:     parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  "
              "bit-identical: %s\n",
              1e3 * sp, 1e3 * ss, ss / sp, spmv_ok ? "yes" : "NO");

  return asm_ok && spmv_ok ? 0 : 1;
}
