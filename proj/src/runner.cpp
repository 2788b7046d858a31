#include "addm/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace addm {

namespace {

double wall_now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << content;
}

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  std::string s = buf;
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

const char* outcome_name(NewtonOutcome o) {
  switch (o) {
    case NewtonOutcome::converged: return "converged";
    case NewtonOutcome::max_iterations: return "max-iterations";
    case NewtonOutcome::line_search_failure: return "line-search";
    case NewtonOutcome::linear_failure: return "linear-solve";
    case NewtonOutcome::evaluation_failure: return "evaluation";
  }
  return "?";
}

struct Boundary {
  double t;
  bool report;
};

std::vector<Boundary> merge_boundaries(const std::vector<double>& reports,
                                       const std::vector<double>* replay,
                                       double teps) {
  std::vector<Boundary> b;
  for (double t : reports) b.push_back({t, true});
  if (replay) {
    for (double t : *replay) {
      bool found = false;
      for (const Boundary& x : b)
        if (std::abs(x.t - t) <= teps) {
          found = true;
          break;
        }
      if (!found) b.push_back({t, false});
    }
  }
  std::sort(b.begin(), b.end(),
            [](const Boundary& a, const Boundary& c) { return a.t < c.t; });
  return b;
}

}  // namespace

RunResult run_deck(const Deck& deck, const RunOptions& opt) {
  const double t0 = wall_now();
  Deck dk = deck;
  if (opt.seed) dk.grid.perm.seed = *opt.seed;
  SolverConfig cfg = dk.solver;
  if (opt.method) cfg.method = *opt.method;
  cfg.workers = opt.workers;
  if (opt.workers > 0) omp_set_num_threads(opt.workers);

  Grid grid = build_grid(dk.grid);
  std::vector<Well> wells = build_wells(dk, grid);
  Simulator sim(std::move(grid), dk.fluid, std::move(wells), cfg);

  RunResult res;
  res.method = cfg.method;
  FluidState s = sim.make_initial_state();
  FluidState s_prev = s;

  const std::vector<double> report_times = schedule_report_times(dk.schedule);
  const double teps = 1e-9 * std::max(1.0, dk.schedule.end);
  const std::vector<Boundary> boundaries =
      merge_boundaries(report_times, opt.replay, teps);

  const bool snapshots = opt.snapshots || dk.output.snapshots;
  const bool trace = std::getenv("ADDM_TRACE") != nullptr;
  const std::string mname = to_string(cfg.method);

  double t = 0;
  double dt = std::clamp(cfg.dt.init, cfg.dt.min, cfg.dt.max);
  double dt_prev = 0;
  StepAttempt last;
  RunStats& st = res.stats;

  for (const Boundary& target : boundaries) {
    while (t < target.t - teps) {
      const double dt_try = std::min(dt, target.t - t);
      FluidState out;
      StepAttempt a = sim.advance(s, s_prev, dt_try,
                                  dt_prev > 0 ? dt_prev : dt_try, out);
      ++st.attempts;
      st.wall_local += a.wall_local_seconds;
      st.wall_linear += a.wall_linear_seconds;
      if (trace)
        std::fprintf(stderr,
                     "[%s] t=%-10.6g dt=%-8.4g %s %-14s gi=%-3d li=%-5ld "
                     "regions=%d coupled=%d locfail=%d\n",
                     mname.c_str(), t, dt_try,
                     a.accepted ? "accept" : "REJECT", outcome_name(a.outcome),
                     a.global_iterations, a.global_linear, a.n_regions,
                     a.coupled_subdomains, a.local_failures);
      if (!a.accepted) {
        st.nrw += a.global_iterations;
        st.nrw_ddm += a.local_iterations;
        dt = dt_try * cfg.dt.cut;
        if (dt < cfg.dt.min) {
          char buf[160];
          std::snprintf(buf, sizeof buf,
                        "%s: timestep cut below %g days near day %g",
                        mname.c_str(), cfg.dt.min, t);
          throw ConfigError(buf);
        }
        continue;
      }
      ++st.steps;
      st.nr += a.global_iterations;
      st.ls += a.global_linear;
      st.nr_ddm += a.local_iterations;
      st.local_failures += a.local_failures;
      s_prev = std::move(s);
      s = std::move(out);
      t += dt_try;
      dt_prev = dt_try;
      res.accepted_times.push_back(t);
      dt = a.global_iterations <= cfg.dt.target_newton
               ? std::min(dt_try * cfg.dt.growth, cfg.dt.max)
               : dt_try;
      last = std::move(a);
    }
    t = target.t;  // absorb roundoff drift at the boundary
    if (!res.accepted_times.empty()) res.accepted_times.back() = t;
    if (target.report) {
      ReportRow row;
      row.time = t;
      row.fpr = field_pressure(sim.grid(), sim.params(), s);
      row.fgpr = last.production[kGas];
      row.fopr = last.production[kOil];
      row.nr = st.nr;
      row.ls = st.ls;
      row.nrw = st.nrw;
      row.nr_ddm = st.nr_ddm;
      row.nrw_ddm = st.nrw_ddm;
      res.rows.push_back(row);
      if (snapshots && !opt.out_dir.empty()) {
        const CouplingPattern* pat = last.used_pattern ? &last.pattern : nullptr;
        write_file(opt.out_dir,
                   "snap_" + mname + "_t" + time_tag(t) + ".vtk",
                   vtk_snapshot(mname, sim.grid(), sim.params(), s,
                                sim.last_delta(), sim.layout(), pat));
        if (pat)
          write_file(opt.out_dir,
                     "coupling_" + mname + "_t" + time_tag(t) + ".csv",
                     coupling_csv(*pat));
      }
    }
  }

  res.final_state = std::move(s);
  st.wall_seconds = wall_now() - t0;
  if (!opt.out_dir.empty())
    write_file(opt.out_dir, "reports_" + mname + ".csv", report_csv(res.rows));
  return res;
}

std::string run_summary(const std::vector<RunResult>& runs) {
  std::ostringstream o;
  const RunResult* fim = nullptr;
  for (const RunResult& r : runs)
    if (r.method == Method::fim) fim = &r;

  o << "method      steps attempts   NRiter   LSiter  LS/NR   NRiterW "
       "NRiter_DDM NRiterW_DDM  localfail  wall_s  linear_s  local_s\n";
  for (const RunResult& r : runs) {
    const RunStats& st = r.stats;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%-10s %6ld %8ld %8ld %8ld %6.2f %9ld %10ld %11ld %10ld "
                  "%7.2f %9.2f %8.2f\n",
                  to_string(r.method).c_str(), st.steps, st.attempts, st.nr,
                  st.ls, st.nr > 0 ? double(st.ls) / st.nr : 0.0, st.nrw,
                  st.nr_ddm, st.nrw_ddm, st.local_failures, st.wall_seconds,
                  st.wall_linear, st.wall_local);
    o << buf;
  }
  if (fim && fim->stats.nr > 0) {
    o << "\nreductions vs FIM (cumulative accepted iterations):\n";
    for (const RunResult& r : runs) {
      if (r.method == Method::fim) continue;
      const double rn =
          100.0 * (1.0 - double(r.stats.nr) / double(fim->stats.nr));
      const double rl =
          fim->stats.ls > 0
              ? 100.0 * (1.0 - double(r.stats.ls) / double(fim->stats.ls))
              : 0.0;
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "  %-8s NRiter reduction %6.1f%%   LSiter reduction %6.1f%%\n",
                    to_string(r.method).c_str(), rn, rl);
      o << buf;
    }
  }
  if (fim) {
    o << "\nfinal-report deviations vs FIM:\n";
    for (const RunResult& r : runs) {
      if (r.method == Method::fim || r.rows.empty() || fim->rows.empty())
        continue;
      const ReportRow& a = r.rows.back();
      const ReportRow& b = fim->rows.back();
      const double dfpr = 100.0 * std::abs(a.fpr - b.fpr) /
                          std::max(1.0, std::abs(b.fpr));
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-8s |dFPR| %.4f%%  FGPR %.6g vs %.6g\n",
                    to_string(r.method).c_str(), dfpr, a.fgpr, b.fgpr);
      o << buf;
    }
  }
  return o.str();
}

CompareResult run_compare(const Deck& deck, const RunOptions& opt,
                          std::vector<Method> methods) {
  if (methods.empty())
    methods = {Method::fim, Method::cddm, Method::addm01, Method::addm02,
               Method::addm03};
  // The adaptive reference goes first; everything else replays its steps.
  auto fim_it = std::find(methods.begin(), methods.end(), Method::fim);
  if (fim_it == methods.end()) {
    methods.insert(methods.begin(), Method::fim);
  } else {
    std::rotate(methods.begin(), fim_it, fim_it + 1);
  }

  CompareResult cr;
  RunOptions ref_opt = opt;
  ref_opt.method = methods[0];
  cr.runs.push_back(run_deck(deck, ref_opt));
  const std::vector<double> targets = cr.runs[0].accepted_times;
  for (size_t m = 1; m < methods.size(); ++m) {
    RunOptions ro = opt;
    ro.method = methods[m];
    ro.replay = &targets;
    cr.runs.push_back(run_deck(deck, ro));
  }
  cr.summary = run_summary(cr.runs);
  if (!opt.out_dir.empty()) write_file(opt.out_dir, "summary.txt", cr.summary);
  return cr;
}

}  // namespace addm
