#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "addm/assembly.hpp"
#include "addm/timeloop.hpp"
#include "oracles.hpp"

using namespace addm;

namespace {

CellProps flux_cell(double p, double lam_oil, double lam_gas) {
  CellProps c;
  c.p = p;
  c.lam[kOil] = lam_oil;
  c.lam[kGas] = lam_gas;
  for (int j = 0; j < 2; ++j) {
    c.pc[j] = c.pc_ds[j] = 0;
    c.rho[j] = c.rho_dp[j] = 0;
    c.lam_dp[j] = 0;
    c.lam_dn[j][0] = c.lam_dn[j][1] = 0;
    c.s_dp[j] = 0;
    c.s_dn[j][0] = c.s_dn[j][1] = 0;
  }
  c.ok = true;
  return c;
}

Grid small_grid(int nx, int ny, int nz, double k = 100.0) {
  std::vector<PermTensor> perm(static_cast<size_t>(nx) * ny * nz, {k, k, k});
  return build_cartesian_grid({nx, ny, nz}, {10, 10, 10}, 8000.0,
                              std::move(perm), 0.3);
}

FluidParams mobile_params() {
  FluidParams p;
  p.relperm.s_or = 0.2;
  p.relperm.s_gr = 0.05;
  p.pc_gas.sg = {0.0, 0.4, 0.8};
  p.pc_gas.pc = {0.0, 3.0, 9.0};
  return p;
}

FluidState random_live_state(const Grid& g, const FluidParams& par,
                             testutil::Rng& rng, double sg_lo = 0.1,
                             double sg_hi = 0.55) {
  std::vector<double> p(g.num_cells()), sg(g.num_cells());
  for (int c = 0; c < g.num_cells(); ++c) {
    p[c] = rng.uniform(4400.0, 5200.0);
    sg[c] = rng.uniform(sg_lo, sg_hi);
  }
  return testutil::state_from_p_sg(g, par, p, sg);
}

}  // namespace

TEST_CASE("face flux: frozen numbers, upwinding, sign flip") {
  FluidParams par;
  par.units.darcy = 1.0;
  par.gravity_on = false;

  const CellProps a = flux_cell(5010.0, 0.5, 0.0);
  const CellProps b = flux_cell(5000.0, 0.25, 0.3);

  // trans 1000 mD*ft, drawdown 10 psi, upwind mobility 0.5.
  const FaceFluxResult f = component_face_flux(par, 1000.0, 0.0, a, b);
  CHECK(f.flux[kOil] == doctest::Approx(5000.0).epsilon(1e-14));
  // Gas is immobile on the upwind side: no flux despite mobile downwind gas.
  CHECK(f.flux[kGas] == 0.0);

  // Reversed potential upwinds to b.
  const FaceFluxResult r = component_face_flux(par, 1000.0, 0.0, b, a);
  CHECK(r.flux[kOil] == doctest::Approx(-1000.0 * 0.5 * 10.0).epsilon(1e-14));
  CHECK(r.flux[kGas] == 0.0);

  // Real flow coefficient scales linearly.
  FluidParams real_par;
  real_par.gravity_on = false;
  const FaceFluxResult s = component_face_flux(real_par, 1000.0, 0.0, a, b);
  CHECK(s.flux[kOil] == doctest::Approx(5000.0 * 0.008527).epsilon(1e-14));
}

TEST_CASE("face flux ties upwind to the first cell") {
  FluidParams par;
  par.units.darcy = 1.0;
  par.gravity_on = false;
  const CellProps a = flux_cell(5000.0, 0.5, 0.0);
  const CellProps b = flux_cell(5000.0, 0.25, 0.0);
  const FaceFluxResult f = component_face_flux(par, 1000.0, 0.0, a, b);
  CHECK(f.flux[kOil] == 0.0);
  // d flux / d P_a = C * lam_upwind; picking side a means 0.5, not 0.25.
  CHECK(f.da[kOil][0] == doctest::Approx(1000.0 * 0.5).epsilon(1e-14));
  CHECK(f.db[kOil][0] == doctest::Approx(-1000.0 * 0.5).epsilon(1e-14));
}

TEST_CASE("gravity enters the potential difference through the density mean") {
  FluidParams par;
  par.units.darcy = 1.0;
  par.gravity_on = true;
  CellProps a = flux_cell(5000.0, 0.5, 0.0);
  CellProps b = flux_cell(5000.0, 0.5, 0.0);
  a.rho[kOil] = 30.0;
  b.rho[kOil] = 32.0;
  // a above b: dz = depth(a) - depth(b) = -10 ft.
  const FaceFluxResult f = component_face_flux(par, 1000.0, -10.0, a, b);
  const double dphi = 0.0 - 31.0 * (1.0 / 144.0) * (-10.0);
  CHECK(f.flux[kOil] == doctest::Approx(1000.0 * 0.5 * dphi).epsilon(1e-12));

  par.gravity_on = false;
  CHECK(component_face_flux(par, 1000.0, -10.0, a, b).flux[kOil] == 0.0);
}

TEST_CASE("capillary pressure shifts the phase potential") {
  FluidParams par;
  par.units.darcy = 1.0;
  par.gravity_on = false;
  CellProps a = flux_cell(5000.0, 0.5, 0.5);
  CellProps b = flux_cell(5000.0, 0.5, 0.5);
  a.pc[kGas] = 2.0;
  b.pc[kGas] = 5.0;
  const FaceFluxResult f = component_face_flux(par, 1000.0, 0.0, a, b);
  CHECK(f.flux[kOil] == 0.0);
  // Gas potential difference: (P_a - pc_a) - (P_b - pc_b) = 3.
  CHECK(f.flux[kGas] == doctest::Approx(1000.0 * 0.5 * 3.0).epsilon(1e-14));
}

TEST_CASE("grid-face overload matches the manual call") {
  const Grid g = small_grid(1, 1, 2);
  const FluidParams par = mobile_params();
  testutil::Rng rng(6);
  const FluidState st = random_live_state(g, par, rng);
  const Face& face = g.faces[0];
  const FaceFluxResult via_grid = component_face_flux(g, face, par, st);
  const CellProps a = eval_cell_props(par, g.pore_volume_ref(),
                                      st.pressure[face.a], &st.moles[2 * face.a]);
  const CellProps b = eval_cell_props(par, g.pore_volume_ref(),
                                      st.pressure[face.b], &st.moles[2 * face.b]);
  const FaceFluxResult manual = component_face_flux(
      par, face.trans_geo, g.depth[face.a] - g.depth[face.b], a, b);
  CHECK(via_grid.flux[kOil] == manual.flux[kOil]);
  CHECK(via_grid.flux[kGas] == manual.flux[kGas]);
  CHECK(g.depth[face.a] - g.depth[face.b] == -10.0);
}

TEST_CASE("uniform static states have zero residual") {
  const std::vector<Well> no_wells;

  // Single layer: gravity cannot act across equal depths.
  const Grid flat = small_grid(4, 3, 1);
  FluidParams par;  // gravity on
  const FluidState s0 = initial_state(par, flat.pore_volume_ref(),
                                      flat.num_cells());
  ProblemScope scope = make_global_scope(flat, no_wells);
  ScopePattern pattern = build_pattern(scope, no_wells);
  BlockCsrMatrix J = pattern.matrix;
  Vec x, F;
  AssemblyScratch scratch;
  restrict_state(scope, s0, x);
  const Vec n_old = restrict_moles(scope, s0);
  REQUIRE(assemble_system(scope, flat, par, no_wells, x, n_old, 5.0, &J,
                          &pattern, F, scratch));
  for (double v : F) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  // Three layers with gravity off.
  const Grid box = small_grid(3, 2, 3);
  par.gravity_on = false;
  const FluidState s1 = initial_state(par, box.pore_volume_ref(),
                                      box.num_cells());
  scope = make_global_scope(box, no_wells);
  pattern = build_pattern(scope, no_wells);
  J = pattern.matrix;
  restrict_state(scope, s1, x);
  const Vec n1 = restrict_moles(scope, s1);
  REQUIRE(assemble_system(scope, box, par, no_wells, x, n1, 5.0, &J, &pattern,
                          F, scratch));
  for (double v : F) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("two-cell residual rows match a hand computation") {
  const Grid g = small_grid(2, 1, 1);
  FluidParams par;
  par.gravity_on = false;
  const std::vector<Well> no_wells;

  const std::vector<double> pr = {5010.0, 5000.0};
  const std::vector<double> sg = {0.0, 0.0};
  const FluidState st = testutil::state_from_p_sg(g, par, pr, sg);

  ProblemScope scope = make_global_scope(g, no_wells);
  ScopePattern pattern = build_pattern(scope, no_wells);
  BlockCsrMatrix J = pattern.matrix;
  Vec x, F;
  AssemblyScratch scratch;
  restrict_state(scope, st, x);
  const Vec n_old = restrict_moles(scope, st);
  const double dt = 2.0;
  REQUIRE(assemble_system(scope, g, par, no_wells, x, n_old, dt, &J, &pattern,
                          F, scratch));

  // Oil-only, s_o = 1 clamps kr to its endpoint 1.
  const double lam_up = phase_molar_density(par, kOil, 5010.0).value / 1.0;
  const double flux = par.units.darcy * 1000.0 * lam_up * 10.0;
  const double pv = g.pore_volume_ref();
  CHECK(F[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));  // volume row a
  CHECK(F[1] == doctest::Approx(flux * dt / pv).epsilon(1e-13));  // oil row a
  CHECK(F[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));  // gas row a
  CHECK(F[4] == doctest::Approx(-flux * dt / pv).epsilon(1e-13));  // oil row b

  // Accumulation: bump cell a's oil moles by 3 lb-mol above the old state.
  Vec x2 = x;
  x2[1] += 3.0;
  REQUIRE(assemble_system(scope, g, par, no_wells, x2, n_old, dt, nullptr,
                          nullptr, F, scratch));
  const CellProps cp = eval_cell_props(par, pv, x2[0], &x2[1]);
  CHECK(F[0] == doctest::Approx(cp.fv / pv).epsilon(1e-12));
  CHECK(F[1] == doctest::Approx((3.0 / dt + flux) * dt / pv).epsilon(1e-12));
}

TEST_CASE("well source terms enter the conservation rows") {
  const Grid g = small_grid(1, 1, 1);
  FluidParams par;
  par.gravity_on = false;

  Well prod;
  prod.name = "P";
  prod.kind = WellKind::producer;
  prod.component = kOil;
  prod.control.kind = ControlKind::molar_rate;
  prod.control.value = 10.0;
  std::vector<Well> wells = {prod};
  attach_wells(wells, g, nullptr);

  ProblemScope scope = make_global_scope(g, wells);
  ScopePattern pattern = build_pattern(scope, wells);
  BlockCsrMatrix J = pattern.matrix;
  Vec x, F;
  AssemblyScratch scratch;
  const FluidState st = initial_state(par, g.pore_volume_ref(), 1);
  restrict_state(scope, st, x);
  const Vec n_old = restrict_moles(scope, st);
  const double dt = 4.0;
  REQUIRE(assemble_system(scope, g, par, wells, x, n_old, dt, &J, &pattern, F,
                          scratch));
  const double pv = g.pore_volume_ref();
  // Production shows up as a positive source in the component row.
  CHECK(F[1] == doctest::Approx(10.0 * dt / pv).epsilon(1e-12));
  CHECK(F[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(scratch.well_totals[0].q[kOil] == doctest::Approx(10.0).epsilon(1e-9));

  // Injection is a negative source.
  Well inj;
  inj.name = "I";
  inj.kind = WellKind::injector;
  inj.component = kGas;
  inj.control.kind = ControlKind::molar_rate;
  inj.control.value = 50.0;
  std::vector<Well> iwells = {inj};
  attach_wells(iwells, g, nullptr);
  ProblemScope iscope = make_global_scope(g, iwells);
  ScopePattern ipattern = build_pattern(iscope, iwells);
  BlockCsrMatrix Ji = ipattern.matrix;
  REQUIRE(assemble_system(iscope, g, par, iwells, x, n_old, dt, &Ji, &ipattern,
                          F, scratch));
  CHECK(F[2] == doctest::Approx(-50.0 * dt / pv).epsilon(1e-12));
  CHECK(scratch.well_totals[0].q[kGas] == doctest::Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("scope construction validates cells and well coverage") {
  const Grid g = small_grid(3, 3, 1);
  std::vector<std::uint8_t> active(9, 1);
  active[4] = 0;
  std::vector<PermTensor> perm(9, {100, 100, 100});
  const Grid holed =
      build_cartesian_grid({3, 3, 1}, {10, 10, 10}, 8000.0, perm, 0.3, active);
  const std::vector<Well> no_wells;

  CHECK_THROWS_WITH(
      make_scope(g, {0, 99}, BoundaryKind::dirichlet_pressure, no_wells),
      "scope contains an invalid or inactive cell");
  CHECK_THROWS_WITH(
      make_scope(holed, {0, 4}, BoundaryKind::dirichlet_pressure, no_wells),
      "scope contains an invalid or inactive cell");

  // A well partially inside the scope is rejected.
  const Grid col = small_grid(2, 1, 3);
  Well w;
  w.name = "W";
  w.kind = WellKind::producer;
  w.component = kOil;
  w.i = 0;
  w.j = 0;
  w.k_from = 0;
  w.k_to = 2;
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 1.0;
  std::vector<Well> wells = {w};
  attach_wells(wells, col, nullptr);
  const int c0 = col.cell_index(0, 0, 0);
  const int c1 = col.cell_index(0, 0, 1);
  CHECK_THROWS_WITH(
      make_scope(col, {c0, c1}, BoundaryKind::dirichlet_pressure, wells),
      "well W straddles the scope");

  // Fully inside: accepted, and perforation pairs appear in the pattern.
  const std::vector<int> whole_col = {c0, c1, col.cell_index(0, 0, 2)};
  const ProblemScope sc =
      make_scope(col, whole_col, BoundaryKind::dirichlet_pressure, wells);
  CHECK(sc.well_ids == std::vector<int>{0});
  const ScopePattern pat = build_pattern(sc, wells);
  // Cells 0 and 2 of the column are not face-adjacent, yet the eliminated
  // bottom-hole pressure couples them.
  CHECK(pat.matrix.find(sc.local_of[c0], sc.local_of[col.cell_index(0, 0, 2)]) !=
        -1);
  CHECK(pat.matrix.find(sc.local_of[col.cell_index(0, 0, 2)], sc.local_of[c0]) !=
        -1);
}

TEST_CASE("restrict and prolong round-trip through scope ordering") {
  const Grid g = small_grid(4, 4, 1);
  const FluidParams par = mobile_params();
  testutil::Rng rng(17);
  const FluidState st = random_live_state(g, par, rng);
  const std::vector<Well> no_wells;
  const std::vector<int> cells = {1, 2, 5, 6, 9};
  const ProblemScope scope =
      make_scope(g, cells, BoundaryKind::dirichlet_pressure, no_wells);
  Vec x;
  restrict_state(scope, st, x);
  REQUIRE(x.size() == 3 * cells.size());
  for (size_t l = 0; l < cells.size(); ++l) {
    CHECK(x[3 * l] == st.pressure[cells[l]]);
    CHECK(x[3 * l + 1] == st.moles[2 * cells[l]]);
    CHECK(x[3 * l + 2] == st.moles[2 * cells[l] + 1]);
  }
  FluidState out = st;
  Vec x2 = x;
  for (double& v : x2) v *= 1.25;
  prolong_state(scope, x2, out);
  for (size_t l = 0; l < cells.size(); ++l)
    CHECK(out.pressure[cells[l]] == 1.25 * st.pressure[cells[l]]);
  // Cells outside the scope are untouched.
  CHECK(out.pressure[0] == st.pressure[0]);
  CHECK(out.moles[2 * 3] == st.moles[2 * 3]);
}

TEST_CASE("a scope covering every cell assembles exactly like the global one") {
  const Grid g = small_grid(4, 3, 2);
  const FluidParams par = mobile_params();
  testutil::Rng rng(23);
  const FluidState st = random_live_state(g, par, rng);

  Well w;
  w.name = "P";
  w.kind = WellKind::producer;
  w.component = kOil;
  w.i = 2;
  w.j = 1;
  w.k_from = 0;
  w.k_to = 1;
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 25.0;
  std::vector<Well> wells = {w};
  attach_wells(wells, g, nullptr);

  const ProblemScope global = make_global_scope(g, wells);
  std::vector<int> all(g.num_cells());
  std::iota(all.begin(), all.end(), 0);
  const ProblemScope manual =
      make_scope(g, all, BoundaryKind::dirichlet_pressure, wells);
  CHECK(manual.whole_domain);
  CHECK(manual.boundary.empty());

  ScopePattern gp = build_pattern(global, wells);
  ScopePattern mp = build_pattern(manual, wells);
  BlockCsrMatrix Jg = gp.matrix, Jm = mp.matrix;
  Vec xg, xm, Fg, Fm;
  AssemblyScratch sg, sm;
  restrict_state(global, st, xg);
  restrict_state(manual, st, xm);
  const Vec ng = restrict_moles(global, st);
  const Vec nm = restrict_moles(manual, st);
  REQUIRE(assemble_system(global, g, par, wells, xg, ng, 3.0, &Jg, &gp, Fg, sg));
  REQUIRE(assemble_system(manual, g, par, wells, xm, nm, 3.0, &Jm, &mp, Fm, sm));
  CHECK(std::memcmp(Fg.data(), Fm.data(), Fg.size() * sizeof(double)) == 0);
  REQUIRE(Jg.val.size() == Jm.val.size());
  CHECK(std::memcmp(Jg.val.data(), Jm.val.data(),
                    Jg.val.size() * sizeof(double)) == 0);
}

TEST_CASE("boundary snapshots freeze the exterior at the start-of-step state") {
  const Grid g = small_grid(4, 1, 1);
  const FluidParams par = mobile_params();
  testutil::Rng rng(29);
  const FluidState st = random_live_state(g, par, rng);
  const std::vector<Well> no_wells;

  ProblemScope dir =
      make_scope(g, {0, 1}, BoundaryKind::dirichlet_pressure, no_wells);
  REQUIRE(dir.boundary.size() == 1);
  snapshot_boundary(dir, g, par, st);
  CHECK(dir.boundary[0].ext_cell == 2);
  CHECK(dir.boundary[0].ext.ok);
  CHECK(dir.boundary[0].ext.p == st.pressure[2]);

  ProblemScope fix =
      make_scope(g, {0, 1}, BoundaryKind::fixed_component_flux, no_wells);
  snapshot_boundary(fix, g, par, st);
  const FaceFluxResult expect = component_face_flux(g, g.faces[1], par, st);
  CHECK(fix.boundary[0].flux[kOil] == doctest::Approx(expect.flux[kOil]));
  CHECK(fix.boundary[0].flux[kGas] == doctest::Approx(expect.flux[kGas]));
}

TEST_CASE("region residual rows agree with global rows at the same state") {
  const Grid g = small_grid(8, 8, 1);
  const FluidParams par = mobile_params();
  testutil::Rng rng(41);
  const FluidState st = random_live_state(g, par, rng);
  const std::vector<Well> no_wells;
  const SubdomainLayout layout = tile_partition(g, 2, 2);

  const ProblemScope global = make_global_scope(g, no_wells);
  Vec xg, Fg;
  AssemblyScratch scratch;
  restrict_state(global, st, xg);
  const Vec ng = restrict_moles(global, st);
  REQUIRE(assemble_system(global, g, par, no_wells, xg, ng, 2.0, nullptr,
                          nullptr, Fg, scratch));

  for (int k = 0; k < layout.n_sub; ++k) {
    ProblemScope region = make_scope(g, layout.cells[k],
                                     BoundaryKind::dirichlet_pressure, no_wells);
    snapshot_boundary(region, g, par, st);
    Vec xr, Fr;
    restrict_state(region, st, xr);
    const Vec nr = restrict_moles(region, st);
    REQUIRE(assemble_system(region, g, par, no_wells, xr, nr, 2.0, nullptr,
                            nullptr, Fr, scratch));
    // The exterior is frozen at exactly the state being evaluated, so region
    // rows reproduce the global rows up to face summation order.
    for (int l = 0; l < region.n(); ++l) {
      const int gl = global.local_of[region.cells[l]];
      for (int d = 0; d < 3; ++d)
        CHECK(Fr[3 * l + d] ==
              doctest::Approx(Fg[3 * gl + d]).epsilon(1e-12).scale(1e-9));
    }
  }
}

TEST_CASE("parallel assembly is bitwise identical to the serial reference") {
  const Grid g = small_grid(6, 5, 2);
  const FluidParams par = mobile_params();
  testutil::Rng rng(53);

  Well w;
  w.name = "P";
  w.kind = WellKind::producer;
  w.component = kOil;
  w.i = 3;
  w.j = 2;
  w.k_from = 0;
  w.k_to = 1;
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 40.0;
  std::vector<Well> wells = {w};
  attach_wells(wells, g, nullptr);

  const ProblemScope scope = make_global_scope(g, wells);
  ScopePattern p1 = build_pattern(scope, wells);
  ScopePattern p2 = build_pattern(scope, wells);
  for (int trial = 0; trial < 5; ++trial) {
    const FluidState st = random_live_state(g, par, rng);
    Vec x, Fp, Fs;
    AssemblyScratch s1, s2;
    restrict_state(scope, st, x);
    const Vec n_old = restrict_moles(scope, st);
    BlockCsrMatrix Jp = p1.matrix, Js = p2.matrix;
    REQUIRE(assemble_system(scope, g, par, wells, x, n_old, 1.5, &Jp, &p1, Fp,
                            s1));
    REQUIRE(serial_ref::assemble_system(scope, g, par, wells, x, n_old, 1.5,
                                        &Js, &p2, Fs, s2));
    CHECK(std::memcmp(Fp.data(), Fs.data(), Fp.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(Jp.val.data(), Js.val.data(),
                      Jp.val.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("analytic Jacobian survives a finite-difference audit without wells") {
  const Grid g = small_grid(3, 3, 1);
  const FluidParams par = mobile_params();
  const std::vector<Well> no_wells;
  const ProblemScope scope = make_global_scope(g, no_wells);
  testutil::Rng rng(61);

  int audited = 0;
  for (int trial = 0; trial < 30 && audited < 5; ++trial) {
    const FluidState st = random_live_state(g, par, rng);
    const FluidState prev = random_live_state(g, par, rng);
    Vec x;
    restrict_state(scope, st, x);
    const Vec n_old = restrict_moles(scope, prev);
    const testutil::FdResult fd = testutil::fd_jacobian_check(
        scope, g, par, no_wells, x, n_old, 2.0);
    if (!fd.evaluated || !fd.smooth) continue;
    ++audited;
    CAPTURE(fd.worst_row);
    CAPTURE(fd.worst_col);
    CHECK(fd.max_rel_err < 1e-6);
  }
  CHECK(audited == 5);
}

TEST_CASE("analytic Jacobian survives the audit with a rate-controlled well") {
  const Grid g = small_grid(3, 3, 1);
  FluidParams par = mobile_params();
  par.gravity_on = false;  // multi-perf wellbore gradient is frozen in the
                           // Jacobian; zero gravity nulls it exactly
  Well w;
  w.name = "P";
  w.kind = WellKind::producer;
  w.component = kOil;
  w.i = 1;
  w.j = 1;
  w.k_from = 0;
  w.k_to = 0;
  w.control.kind = ControlKind::molar_rate;
  w.control.value = 30.0;
  std::vector<Well> wells = {w};
  attach_wells(wells, g, nullptr);
  const ProblemScope scope = make_global_scope(g, wells);
  testutil::Rng rng(67);

  int audited = 0;
  for (int trial = 0; trial < 40 && audited < 5; ++trial) {
    const FluidState st = random_live_state(g, par, rng);
    Vec x;
    restrict_state(scope, st, x);
    const Vec n_old = restrict_moles(scope, st);
    // Reject states whose wellbore solve landed in a clamped corner.
    Vec F;
    AssemblyScratch scratch;
    REQUIRE(assemble_system(scope, g, par, wells, x, n_old, 2.0, nullptr,
                            nullptr, F, scratch));
    if (scratch.well_states[0].crossflow_flagged ||
        scratch.well_states[0].shut)
      continue;
    const testutil::FdResult fd =
        testutil::fd_jacobian_check(scope, g, par, wells, x, n_old, 2.0);
    if (!fd.evaluated || !fd.smooth) continue;
    ++audited;
    CAPTURE(fd.worst_row);
    CAPTURE(fd.worst_col);
    CHECK(fd.max_rel_err < 1e-6);
  }
  CHECK(audited == 5);
}
