#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "addm/wells.hpp"
#include "oracles.hpp"

using namespace addm;

namespace {

// Minimal hand-filled cell for rate algebra tests (derivatives zeroed).
CellProps flat_cell(double p, double lam_oil, double lam_gas) {
  CellProps c;
  c.p = p;
  c.lam[kOil] = lam_oil;
  c.lam[kGas] = lam_gas;
  for (int j = 0; j < 2; ++j) {
    c.lam_dp[j] = 0;
    c.lam_dn[j][0] = c.lam_dn[j][1] = 0;
    c.s[j] = 0.5;
    c.rho[j] = 0;
  }
  c.ok = true;
  return c;
}

FluidParams unit_darcy_params() {
  FluidParams p;
  p.units.darcy = 1.0;
  p.gravity_on = false;
  return p;
}

}  // namespace

TEST_CASE("Peaceman index on an isotropic square cell") {
  // dx = dy = 20, k = 500: r_eq = 0.28 sqrt(800)/2, WI = 2 pi k dz / ln(r_eq/r_w).
  const double wi = peaceman_index(20, 20, 10, 500, 500, 0.25, 0);
  const double r_eq = 0.28 * std::sqrt(800.0) / 2.0;
  CHECK(r_eq == doctest::Approx(3.95979797).epsilon(1e-8));
  CHECK(wi == doctest::Approx(2.0 * M_PI * 500.0 * 10.0 / std::log(r_eq / 0.25))
                  .epsilon(1e-12));

  // Anisotropy is symmetric on a square cell.
  CHECK(peaceman_index(20, 20, 10, 100, 400, 0.25, 0) ==
        doctest::Approx(peaceman_index(20, 20, 10, 400, 100, 0.25, 0)));

  // Skin throttles the index monotonically toward zero.
  const double wi0 = peaceman_index(20, 20, 10, 500, 500, 0.25, 0);
  const double wi5 = peaceman_index(20, 20, 10, 500, 500, 0.25, 5);
  CHECK(wi5 < wi0);
  CHECK(peaceman_index(20, 20, 10, 500, 500, 0.25, 1e9) < 1e-4);
}

TEST_CASE("Peaceman index rejects degenerate geometry") {
  CHECK_THROWS_WITH(peaceman_index(20, 20, 10, 0, 500, 0.25, 0),
                    "well cell permeability must be positive");
  CHECK_THROWS_WITH(peaceman_index(20, 20, 10, 500, 500, 0.0, 0),
                    "well radius must be positive");
  CHECK_THROWS_WITH(peaceman_index(20, 20, 10, 500, 500, 10.0, 0),
                    "equivalent radius does not exceed well radius");
  CHECK_THROWS_WITH(peaceman_index(20, 20, 10, 500, 500, 0.25, -10.0),
                    "negative skin makes well index singular");
}

TEST_CASE("producer perforation rate: frozen numbers and clamping") {
  const FluidParams par = unit_darcy_params();
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;

  WellState ws;
  ws.p_bh = 4990.0;  // drawdown 10 psi, gamma 0
  const CellProps cell = flat_cell(5000.0, 0.5, 0.125);

  const PerfRate r = perf_rate(w, ws, par, 100.0, 0.0, cell);
  CHECK(r.q[kOil] == doctest::Approx(500.0).epsilon(1e-14));
  CHECK(r.q[kGas] == doctest::Approx(125.0).epsilon(1e-14));
  CHECK(r.dq_dpbh[kOil] == doctest::Approx(-50.0).epsilon(1e-14));
  CHECK(r.dq_dx[kOil][0] == doctest::Approx(50.0).epsilon(1e-14));
  CHECK_FALSE(r.crossflow);

  // Zero drawdown: no flow, not crossflow.
  ws.p_bh = 5000.0;
  const PerfRate r0 = perf_rate(w, ws, par, 100.0, 0.0, cell);
  CHECK(r0.q[kOil] == 0.0);
  CHECK_FALSE(r0.crossflow);
  // Reversed drawdown: clamped to zero and flagged.
  ws.p_bh = 5010.0;
  const PerfRate rc = perf_rate(w, ws, par, 100.0, 0.0, cell);
  CHECK(rc.q[kOil] == 0.0);
  CHECK(rc.q[kGas] == 0.0);
  CHECK(rc.crossflow);

  // Shut well produces nothing regardless of pressures.
  ws.p_bh = 0.0;
  ws.shut = true;
  CHECK(perf_rate(w, ws, par, 100.0, 0.0, cell).q[kOil] == 0.0);
}

TEST_CASE("injector perforation rate uses total mobility on one component") {
  const FluidParams par = unit_darcy_params();
  Well w;
  w.kind = WellKind::injector;
  w.component = kGas;

  WellState ws;
  ws.p_bh = 5010.0;
  const CellProps cell = flat_cell(5000.0, 0.3, 0.2);
  const PerfRate r = perf_rate(w, ws, par, 100.0, 0.0, cell);
  CHECK(r.q[kGas] == doctest::Approx(-500.0).epsilon(1e-14));
  CHECK(r.q[kOil] == 0.0);
  CHECK(r.dq_dpbh[kGas] == doctest::Approx(-50.0).epsilon(1e-14));

  // Backflow into the well clamps and flags.
  ws.p_bh = 4990.0;
  const PerfRate rc = perf_rate(w, ws, par, 100.0, 0.0, cell);
  CHECK(rc.q[kGas] == 0.0);
  CHECK(rc.crossflow);
}

TEST_CASE("wellbore gradient accounts for perforation depth offset") {
  FluidParams par = unit_darcy_params();
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;
  WellState ws;
  ws.p_bh = 4990.0;
  ws.gamma = 0.4;  // psi/ft
  const CellProps cell = flat_cell(5000.0, 0.5, 0.0);
  // p_wf = 4990 + 0.4*20 = 4998, drawdown 2.
  const PerfRate r = perf_rate(w, ws, par, 100.0, 20.0, cell);
  CHECK(r.q[kOil] == doctest::Approx(100.0 * 0.5 * 2.0).epsilon(1e-14));
}

TEST_CASE("perforation rate derivatives match finite differences") {
  FluidParams par;
  par.relperm.s_or = 0.2;
  par.relperm.s_gr = 0.05;
  par.gravity_on = false;
  const double pv_ref = 1200.0;
  testutil::Rng rng(77);

  for (int trial = 0; trial < 40; ++trial) {
    Well w;
    w.kind = rng.coin() ? WellKind::producer : WellKind::injector;
    w.component = (w.kind == WellKind::injector && rng.coin()) ? kGas : kOil;
    WellState ws;
    const double P = rng.uniform(4500.0, 5200.0);
    ws.p_bh = w.kind == WellKind::producer ? P - rng.uniform(5.0, 60.0)
                                           : P + rng.uniform(5.0, 60.0);
    const double sg = rng.uniform(0.1, 0.6);
    const double vf = pv_ref * rng.uniform(0.95, 1.05);
    double n0[2] = {phase_molar_density(par, kOil, P).value * (1 - sg) * vf,
                    phase_molar_density(par, kGas, P).value * sg * vf};
    const double wi = rng.uniform(50.0, 200.0);

    auto q_at = [&](double Px, const double* nx, double pbh) {
      WellState w2 = ws;
      w2.p_bh = pbh;
      const CellProps c = eval_cell_props(par, pv_ref, Px, nx);
      REQUIRE(c.ok);
      return perf_rate(w, w2, par, wi, 0.0, c);
    };
    const PerfRate base = q_at(P, n0, ws.p_bh);

    const double hp = 1e-4 * P;
    const PerfRate qp = q_at(P + hp, n0, ws.p_bh);
    const PerfRate qm = q_at(P - hp, n0, ws.p_bh);
    for (int i = 0; i < 2; ++i) {
      const double fd = (qp.q[i] - qm.q[i]) / (2 * hp);
      CHECK(base.dq_dx[i][0] == doctest::Approx(fd).epsilon(2e-5).scale(1.0));
    }
    for (int comp = 0; comp < 2; ++comp) {
      const double hn = 1e-5 * std::max(n0[comp], 1.0);
      double np[2] = {n0[0], n0[1]}, nm[2] = {n0[0], n0[1]};
      np[comp] += hn;
      nm[comp] -= hn;
      const PerfRate a = q_at(P, np, ws.p_bh);
      const PerfRate b = q_at(P, nm, ws.p_bh);
      for (int i = 0; i < 2; ++i) {
        const double fd = (a.q[i] - b.q[i]) / (2 * hn);
        CHECK(base.dq_dx[i][comp + 1] ==
              doctest::Approx(fd).epsilon(2e-5).scale(1.0));
      }
    }
    const double hb = 1e-4 * std::abs(ws.p_bh);
    const PerfRate bp = q_at(P, n0, ws.p_bh + hb);
    const PerfRate bm = q_at(P, n0, ws.p_bh - hb);
    for (int i = 0; i < 2; ++i) {
      const double fd = (bp.q[i] - bm.q[i]) / (2 * hb);
      CHECK(base.dq_dpbh[i] == doctest::Approx(fd).epsilon(2e-5).scale(1.0));
    }
  }
}

TEST_CASE("rate control resolves to the closed-form bottom-hole pressure") {
  FluidParams par;  // real darcy constant
  par.gravity_on = false;
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 10.0;

  const std::vector<double> wi = {100.0};
  const std::vector<double> dz = {0.0};
  const std::vector<CellProps> props = {flat_cell(5000.0, 0.5, 0.0)};
  const WellState ws = resolve_control(w, par, wi, dz, props, 10.0);
  CHECK_FALSE(ws.bhp_mode);
  CHECK_FALSE(ws.shut);
  CHECK_FALSE(ws.crossflow_flagged);
  const double cwi = 100.0 * par.units.darcy;
  CHECK(ws.p_bh == doctest::Approx(5000.0 - 10.0 / (cwi * 0.5)).epsilon(1e-12));
  CHECK(ws.gamma == 0.0);

  // The achieved rate equals the target.
  const PerfRate r = perf_rate(w, ws, par, 100.0, 0.0, props[0]);
  CHECK(r.q[kOil] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("crossflowing rate control still meets the target on the active set") {
  FluidParams par;
  par.gravity_on = false;
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;
  w.control.kind = ControlKind::molar_rate;

  // Strong pressure contrast: the closed-form p_bh sits above the weak
  // perforation's pressure, so that perforation clamps.
  const std::vector<double> wi = {100.0, 100.0};
  const std::vector<double> dz = {0.0, 10.0};
  std::vector<CellProps> props = {flat_cell(5000.0, 0.5, 0.0),
                                  flat_cell(4000.0, 0.5, 0.0)};
  const double target = 10.0;
  const WellState ws = resolve_control(w, par, wi, dz, props, target);
  CHECK(ws.crossflow_flagged);
  CHECK(ws.p_bh > 4000.0);  // the weak perforation would backflow

  double flow = 0;
  for (int p = 0; p < 2; ++p) {
    const double dd = props[p].p - ws.p_bh;
    if (dd > 0) flow += wi[p] * par.units.darcy * props[p].lam[kOil] * dd;
  }
  CHECK(flow == doctest::Approx(target).epsilon(1e-10));
}

TEST_CASE("unreachable targets shut the well; zero targets do not") {
  FluidParams par;
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;
  w.control.kind = ControlKind::molar_rate;
  const std::vector<double> wi = {100.0};
  const std::vector<double> dz = {0.0};
  const std::vector<CellProps> props = {flat_cell(5000.0, 0.0, 0.0)};

  const WellState shut = resolve_control(w, par, wi, dz, props, 25.0);
  CHECK(shut.shut);
  CHECK(shut.p_bh == doctest::Approx(5000.0));

  const WellState idle = resolve_control(w, par, wi, dz, props, 0.0);
  CHECK_FALSE(idle.shut);
}

TEST_CASE("BHP control and BHP bounds") {
  FluidParams par;
  par.gravity_on = false;
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;
  w.control.kind = ControlKind::bhp;
  const std::vector<double> wi = {100.0};
  const std::vector<double> dz = {0.0};
  const std::vector<CellProps> props = {flat_cell(5000.0, 0.5, 0.0)};

  const WellState ws = resolve_control(w, par, wi, dz, props, 4400.0);
  CHECK(ws.bhp_mode);
  CHECK(ws.p_bh == 4400.0);
  CHECK_FALSE(ws.crossflow_flagged);
  // A BHP above the cell pressure flags backflow for a producer.
  CHECK(resolve_control(w, par, wi, dz, props, 5100.0).crossflow_flagged);

  // Rate control whose closed form violates the bound switches to the bound.
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 1e5;
  w.control.bhp_limit = 4800.0;
  w.control.has_limit = true;
  const WellState bound = resolve_control(w, par, wi, dz, props, 1e5);
  CHECK(bound.bhp_mode);
  CHECK(bound.p_bh == 4800.0);

  // Injector bound is an upper bound.
  Well inj;
  inj.kind = WellKind::injector;
  inj.component = kGas;
  inj.control.kind = ControlKind::molar_rate;
  inj.control.bhp_limit = 5500.0;
  inj.control.has_limit = true;
  const WellState ib = resolve_control(inj, par, wi, dz, props, 1e5);
  CHECK(ib.bhp_mode);
  CHECK(ib.p_bh == 5500.0);
}

TEST_CASE("wellbore gradient comes from the reference perforation mixture") {
  FluidParams par;
  par.gravity_on = true;
  Well w;
  w.kind = WellKind::producer;
  w.component = kOil;
  w.control.kind = ControlKind::bhp;
  CellProps ref = flat_cell(5000.0, 0.5, 0.0);
  ref.s[kOil] = 0.6;
  ref.s[kGas] = 0.4;
  ref.rho[kOil] = 30.0;
  ref.rho[kGas] = 1.2;
  const WellState ws = resolve_control(w, par, {100.0}, {0.0}, {ref}, 4500.0);
  CHECK(ws.gamma ==
        doctest::Approx((0.6 * 30.0 + 0.4 * 1.2) / 144.0).epsilon(1e-14));

  par.gravity_on = false;
  CHECK(resolve_control(w, par, {100.0}, {0.0}, {ref}, 4500.0).gamma == 0.0);
}

TEST_CASE("surface-rate targets convert through surface molar density") {
  FluidParams par;
  Well w;
  w.kind = WellKind::injector;
  w.component = kGas;
  w.control.kind = ControlKind::surface_rate;
  w.control.value = 1000.0;
  CHECK(molar_target(w, par) == doctest::Approx(1000.0 * 0.05));
  w.component = kOil;
  CHECK(molar_target(w, par) == doctest::Approx(1000.0 * 0.75));
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 42.0;
  CHECK(molar_target(w, par) == 42.0);
}

TEST_CASE("attach_wells validates placement and fills Peaceman indices") {
  std::vector<PermTensor> perm(4 * 4 * 2, {200, 200, 20});
  Grid g = build_cartesian_grid({4, 4, 2}, {20, 20, 10}, 8000.0, perm, 0.3);

  Well w;
  w.name = "P1";
  w.i = 1;
  w.j = 2;
  w.k_from = 0;
  w.k_to = 1;
  std::vector<Well> wells = {w};
  attach_wells(wells, g, nullptr);
  CHECK(wells[0].cells ==
        std::vector<int>{g.cell_index(1, 2, 0), g.cell_index(1, 2, 1)});
  REQUIRE(wells[0].wi.size() == 2);
  CHECK(wells[0].wi[0] ==
        doctest::Approx(peaceman_index(20, 20, 10, 200, 200, 0.25, 0)));

  auto expect_throw = [&](auto mutate, const char* msg) {
    std::vector<Well> bad = {w};
    mutate(bad[0]);
    CHECK_THROWS_WITH(attach_wells(bad, g, nullptr), msg);
  };
  expect_throw([](Well& x) { x.i = 4; }, "well P1: column outside grid");
  expect_throw([](Well& x) { x.j = -1; }, "well P1: column outside grid");
  expect_throw([](Well& x) { x.k_to = 2; }, "well P1: bad layer range");
  expect_throw([](Well& x) { x.k_from = 1; x.k_to = 0; },
               "well P1: bad layer range");

  std::vector<std::uint8_t> active(4 * 4 * 2, 1);
  active[g.cell_index(1, 2, 1)] = 0;
  Grid holed = build_cartesian_grid({4, 4, 2}, {20, 20, 10}, 8000.0, perm, 0.3,
                                    active);
  std::vector<Well> on_hole = {w};
  CHECK_THROWS_WITH(attach_wells(on_hole, holed, nullptr),
                    "well P1: perforates inactive cell");

  Well w2 = w;
  w2.name = "P2";
  w2.k_from = 1;
  w2.k_to = 1;
  std::vector<Well> overlapping = {w, w2};
  CHECK_THROWS_WITH(attach_wells(overlapping, g, nullptr),
                    "two wells perforate the same cell");
}
