#include "addm/deck.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace addm {

namespace {

struct Assign {
  std::string key;
  std::vector<std::string> values;
  int line = 0;
  mutable bool used = false;
};

struct Node {
  std::string name;   // block type
  std::string label;  // well name for 'well NAME {'
  int line = 0;
  std::vector<Assign> assigns;
  std::vector<Node> children;
  mutable bool used = false;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("deck line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_line(const std::string& raw) {
  std::string s = raw;
  const size_t hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  std::vector<std::string> tok;
  std::istringstream is(s);
  std::string w;
  while (is >> w) tok.push_back(w);
  return tok;
}

Node parse_tree(const std::string& text) {
  Node root;
  root.name = "(deck)";
  std::vector<Node*> stack = {&root};
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::vector<std::string> tok = split_line(line);
    if (tok.empty()) continue;
    if (tok.size() == 1 && tok[0] == "}") {
      if (stack.size() == 1) fail(lineno, "unmatched '}'");
      stack.pop_back();
      continue;
    }
    if (tok.back() == "{") {
      Node n;
      n.line = lineno;
      if (tok.size() == 2) {
        n.name = tok[0];
      } else if (tok.size() == 3) {
        n.name = tok[0];
        n.label = tok[1];
      } else {
        fail(lineno, "malformed block header");
      }
      stack.back()->children.push_back(std::move(n));
      stack.push_back(&stack.back()->children.back());
      continue;
    }
    if (tok.size() >= 3 && tok[1] == "=") {
      Assign a;
      a.key = tok[0];
      a.values.assign(tok.begin() + 2, tok.end());
      a.line = lineno;
      stack.back()->assigns.push_back(std::move(a));
      continue;
    }
    fail(lineno, "expected 'key = value...', 'name {' or '}'");
  }
  if (stack.size() != 1) fail(lineno, "unclosed block '" + stack.back()->name + "'");
  return root;
}

double to_double(const Assign& a, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(a.line, "bad number '" + v + "' for key '" + a.key + "'");
  }
}

long long to_int(const Assign& a, const std::string& v) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(a.line, "bad integer '" + v + "' for key '" + a.key + "'");
  }
}

// Typed access with single-use bookkeeping; unused keys are reported by
// finish_node after extraction.
class Reader {
 public:
  explicit Reader(const Node& n) : n_(n) {}

  const Assign* find(const std::string& key) const {
    const Assign* hit = nullptr;
    for (const auto& a : n_.assigns) {
      if (a.key == key) {
        if (hit) fail(a.line, "duplicate key '" + key + "'");
        hit = &a;
      }
    }
    if (hit) hit->used = true;
    return hit;
  }
  bool has(const std::string& key) const {
    for (const auto& a : n_.assigns)
      if (a.key == key) return true;
    return false;
  }

  double num(const std::string& key, double dflt) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    return to_double(*a, a->values[0]);
  }
  double req_num(const std::string& key) const {
    const Assign* a = find(key);
    if (!a) fail(n_.line, "missing required key '" + key + "'");
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    return to_double(*a, a->values[0]);
  }
  int integer(const std::string& key, int dflt) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    return static_cast<int>(to_int(*a, a->values[0]));
  }
  int req_integer(const std::string& key) const {
    const Assign* a = find(key);
    if (!a) fail(n_.line, "missing required key '" + key + "'");
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    return static_cast<int>(to_int(*a, a->values[0]));
  }
  unsigned long long unsigned_integer(const std::string& key,
                                      unsigned long long dflt) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    const long long v = to_int(*a, a->values[0]);
    if (v < 0) fail(a->line, "key '" + key + "' wants a non-negative integer");
    return static_cast<unsigned long long>(v);
  }
  unsigned long long req_unsigned_integer(const std::string& key) const {
    if (!find(key)) fail(n_.line, "missing required key '" + key + "'");
    return unsigned_integer(key, 0);
  }
  std::string word(const std::string& key, const std::string& dflt) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    return a->values[0];
  }
  bool flag(const std::string& key, bool dflt) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    if (a->values.size() != 1) fail(a->line, "key '" + key + "' wants one value");
    const std::string& v = a->values[0];
    if (v == "on" || v == "true") return true;
    if (v == "off" || v == "false") return false;
    fail(a->line, "key '" + key + "' wants on/off");
  }
  std::vector<double> nums(const std::string& key,
                           std::vector<double> dflt = {}) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    std::vector<double> out;
    for (const auto& v : a->values) out.push_back(to_double(*a, v));
    return out;
  }
  std::vector<int> ints(const std::string& key,
                        std::vector<int> dflt = {}) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    std::vector<int> out;
    for (const auto& v : a->values)
      out.push_back(static_cast<int>(to_int(*a, v)));
    return out;
  }
  // Pair of numbers (per-component parameters).
  std::array<double, 2> pair(const std::string& key,
                             std::array<double, 2> dflt) const {
    const Assign* a = find(key);
    if (!a) return dflt;
    if (a->values.size() != 2) fail(a->line, "key '" + key + "' wants two values");
    return {to_double(*a, a->values[0]), to_double(*a, a->values[1])};
  }
  // word + number, e.g. 'control = molar_rate 26'.
  std::pair<std::string, double> word_num(const std::string& key,
                                          std::pair<std::string, double> dflt,
                                          bool required) const {
    const Assign* a = find(key);
    if (!a) {
      if (required) fail(n_.line, "missing required key '" + key + "'");
      return dflt;
    }
    if (a->values.size() != 2)
      fail(a->line, "key '" + key + "' wants '<kind> <value>'");
    return {a->values[0], to_double(*a, a->values[1])};
  }

  const Node* child(const std::string& name) const {
    const Node* hit = nullptr;
    for (const auto& c : n_.children) {
      if (c.name == name) {
        if (hit) fail(c.line, "duplicate block '" + name + "'");
        hit = &c;
      }
    }
    if (hit) hit->used = true;
    return hit;
  }

  const Node& node() const { return n_; }

 private:
  const Node& n_;
};

void finish_node(const Node& n, const std::string& path) {
  for (const auto& a : n.assigns)
    if (!a.used)
      fail(a.line, "unknown key '" + a.key + "' in block '" + path + "'");
  for (const auto& c : n.children) {
    if (!c.used)
      fail(c.line, "unknown block '" + c.name + "' in block '" + path + "'");
    finish_node(c, path + "/" + c.name);
  }
}

PermSpec parse_perm(const Node& node) {
  Reader r(node);
  PermSpec p;
  p.kind = r.word("kind", p.kind);
  if (p.kind != "uniform" && p.kind != "layered" && p.kind != "gaussian_layers")
    fail(node.line, "perm kind must be uniform, layered or gaussian_layers");
  p.kh = r.nums("kh", p.kh);
  p.bands = r.ints("bands", p.bands);
  p.kv_ratio = r.num("kv_ratio", p.kv_ratio);
  p.stddev_frac = r.num("stddev_frac", p.stddev_frac);
  p.min_kh = r.num("min_kh", p.min_kh);
  // Random fields must be reproducible from the deck alone, so the seed is
  // mandatory rather than defaulted.
  p.seed = (p.kind == "gaussian_layers") ? r.req_unsigned_integer("seed")
                                         : r.unsigned_integer("seed", p.seed);
  return p;
}

GridSpec parse_grid(const Node& node) {
  Reader r(node);
  GridSpec g;
  g.nx = r.req_integer("nx");
  g.ny = r.req_integer("ny");
  g.nz = r.req_integer("nz");
  g.dx = r.num("dx", g.dx);
  g.dy = r.num("dy", g.dy);
  g.dz = r.num("dz", g.dz);
  g.top_depth = r.num("top_depth", g.top_depth);
  g.porosity = r.num("porosity", g.porosity);
  if (const Node* p = r.child("perm")) g.perm = parse_perm(*p);
  return g;
}

FluidParams parse_fluid(const Node& node) {
  Reader r(node);
  FluidParams f;
  f.xi_ref = r.pair("xi_ref", f.xi_ref);
  f.compressibility = r.pair("compressibility", f.compressibility);
  f.viscosity = r.pair("viscosity", f.viscosity);
  f.molar_mass = r.pair("molar_mass", f.molar_mass);
  f.surface_molar_density =
      r.pair("surface_molar_density", f.surface_molar_density);
  f.rock_compressibility = r.num("rock_compressibility", f.rock_compressibility);
  f.p_ref = r.num("p_ref", f.p_ref);
  f.p_init = r.num("p_init", f.p_init);
  f.gravity_on = r.flag("gravity", f.gravity_on);
  f.units.darcy = r.num("flow_coefficient", f.units.darcy);
  f.units.gravity = r.num("gravity_factor", f.units.gravity);
  if (const Node* rp = r.child("relperm")) {
    Reader rr(*rp);
    f.relperm.exponent = rr.pair("exponents", f.relperm.exponent);
    f.relperm.kr_max = rr.pair("kr_max", f.relperm.kr_max);
    f.relperm.s_or = rr.num("s_or", f.relperm.s_or);
    f.relperm.s_gr = rr.num("s_gr", f.relperm.s_gr);
  }
  if (const Node* pc = r.child("pc")) {
    Reader rr(*pc);
    f.pc_gas.sg = rr.nums("sg");
    f.pc_gas.pc = rr.nums("pc");
    if (f.pc_gas.sg.size() != f.pc_gas.pc.size() || f.pc_gas.sg.empty())
      fail(pc->line, "pc wants matching non-empty sg and pc lists");
    if (!std::is_sorted(f.pc_gas.sg.begin(), f.pc_gas.sg.end()))
      fail(pc->line, "pc sg nodes must ascend");
  }
  return f;
}

WellSpec parse_well(const Node& node) {
  if (node.label.empty()) fail(node.line, "well block needs a name");
  Reader r(node);
  WellSpec w;
  w.name = node.label;
  w.kind = r.word("kind", w.kind);
  if (w.kind != "producer" && w.kind != "injector")
    fail(node.line, "well kind must be producer or injector");
  w.component = r.word("component", w.component);
  if (w.component != "oil" && w.component != "gas")
    fail(node.line, "well component must be oil or gas");
  w.i = r.req_integer("i");
  w.j = r.req_integer("j");
  w.k_from = r.req_integer("k_from");
  w.k_to = r.req_integer("k_to");
  w.radius = r.num("radius", w.radius);
  w.skin = r.num("skin", w.skin);
  const auto [ckind, cval] = r.word_num("control", {w.control, w.target}, true);
  if (ckind != "molar_rate" && ckind != "surface_rate" && ckind != "bhp")
    fail(node.line, "control must be molar_rate, surface_rate or bhp");
  w.control = ckind;
  w.target = cval;
  if (r.has("bhp_limit")) w.bhp_limit = r.req_num("bhp_limit");
  return w;
}

SolverConfig parse_solver(const Node& node) {
  Reader r(node);
  SolverConfig s;
  s.method = method_from_string(r.word("method", to_string(s.method)));
  const std::vector<int> tiles = r.ints("tiles", {s.tiles_x, s.tiles_y});
  if (tiles.size() != 2) fail(node.line, "tiles wants two values");
  s.tiles_x = tiles[0];
  s.tiles_y = tiles[1];
  s.threshold =
      threshold_strategy_from_string(r.word("threshold", to_string(s.threshold)));
  s.expand_layers = r.integer("expand_layers", s.expand_layers);
  s.blocks = r.integer("blocks", s.blocks);
  const std::string bc = r.word("boundary", "dirichlet");
  if (bc == "dirichlet") s.bc = BoundaryKind::dirichlet_pressure;
  else if (bc == "fixed_flux") s.bc = BoundaryKind::fixed_component_flux;
  else fail(node.line, "boundary must be dirichlet or fixed_flux");
  if (const Node* n = r.child("newton")) {
    Reader rr(*n);
    s.newton_global.rtol = rr.num("rtol", s.newton_global.rtol);
    s.newton_local.rtol = rr.num("local_rtol", s.newton_local.rtol);
    s.newton_global.atol = rr.num("atol", s.newton_global.atol);
    s.newton_global.max_iterations =
        rr.integer("max_iterations", s.newton_global.max_iterations);
    s.newton_global.max_backtracks =
        rr.integer("max_backtracks", s.newton_global.max_backtracks);
    s.newton_global.dp_cap = rr.num("dp_cap", s.newton_global.dp_cap);
    s.newton_global.ds_cap = rr.num("ds_cap", s.newton_global.ds_cap);
    const double lr = s.newton_local.rtol;
    s.newton_local = s.newton_global;
    s.newton_local.rtol = lr;
  }
  if (const Node* n = r.child("linear")) {
    Reader rr(*n);
    s.lin_global.rtol = rr.num("rtol", s.lin_global.rtol);
    s.lin_local.rtol = rr.num("local_rtol", s.lin_local.rtol);
    s.lin_global.restart = rr.integer("restart", s.lin_global.restart);
    s.lin_global.max_iterations =
        rr.integer("max_iterations", s.lin_global.max_iterations);
    s.lin_local.restart = s.lin_global.restart;
    s.lin_local.max_iterations = s.lin_global.max_iterations;
  }
  if (const Node* n = r.child("dt")) {
    Reader rr(*n);
    s.dt.init = rr.num("init", s.dt.init);
    s.dt.min = rr.num("min", s.dt.min);
    s.dt.max = rr.num("max", s.dt.max);
    s.dt.growth = rr.num("growth", s.dt.growth);
    s.dt.cut = rr.num("cut", s.dt.cut);
    s.dt.target_newton = rr.integer("target_newton", s.dt.target_newton);
  }
  return s;
}

ScheduleSpec parse_schedule(const Node& node) {
  Reader r(node);
  ScheduleSpec s;
  s.end = r.req_num("end");
  s.report_interval = r.num("report_interval", 0.0);
  s.report_times = r.nums("report_times");
  if (!s.report_times.empty() && s.report_interval > 0)
    fail(node.line, "give report_interval or report_times, not both");
  if (!std::is_sorted(s.report_times.begin(), s.report_times.end()))
    fail(node.line, "report_times must ascend");
  return s;
}

}  // namespace

Deck parse_deck(const std::string& text) {
  const Node root = parse_tree(text);
  Reader r(root);
  Deck d;
  if (const Assign* t = r.find("title")) {
    for (size_t i = 0; i < t->values.size(); ++i) {
      if (i) d.title += ' ';
      d.title += t->values[i];
    }
  }
  const Node* g = r.child("grid");
  if (!g) throw ConfigError("deck needs a grid block");
  d.grid = parse_grid(*g);
  if (const Node* f = r.child("fluid")) d.fluid = parse_fluid(*f);
  if (const Node* w = r.child("wells")) {
    Reader rw(*w);
    for (const auto& c : w->children) {
      if (c.name != "well") fail(c.line, "wells block holds only well blocks");
      c.used = true;
      d.wells.push_back(parse_well(c));
    }
    (void)rw;
  }
  if (const Node* s = r.child("solver")) d.solver = parse_solver(*s);
  const Node* sch = r.child("schedule");
  if (!sch) throw ConfigError("deck needs a schedule block");
  d.schedule = parse_schedule(*sch);
  if (const Node* o = r.child("output")) {
    Reader ro(*o);
    d.output.snapshots = ro.flag("snapshots", d.output.snapshots);
  }
  finish_node(root, "deck");
  return d;
}

Deck parse_deck_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open deck file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_deck(ss.str());
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_pair(std::ostringstream& o, const std::string& indent,
               const std::string& key, const std::array<double, 2>& v) {
  o << indent << key << " = " << fmt(v[0]) << " " << fmt(v[1]) << "\n";
}

}  // namespace

std::string echo_deck(const Deck& d) {
  std::ostringstream o;
  if (!d.title.empty()) o << "title = " << d.title << "\n";
  o << "grid {\n";
  o << "  nx = " << d.grid.nx << "\n  ny = " << d.grid.ny
    << "\n  nz = " << d.grid.nz << "\n";
  o << "  dx = " << fmt(d.grid.dx) << "\n  dy = " << fmt(d.grid.dy)
    << "\n  dz = " << fmt(d.grid.dz) << "\n";
  o << "  top_depth = " << fmt(d.grid.top_depth) << "\n";
  o << "  porosity = " << fmt(d.grid.porosity) << "\n";
  o << "  perm {\n";
  o << "    kind = " << d.grid.perm.kind << "\n";
  o << "    kh =";
  for (double v : d.grid.perm.kh) o << " " << fmt(v);
  o << "\n";
  if (!d.grid.perm.bands.empty()) {
    o << "    bands =";
    for (int v : d.grid.perm.bands) o << " " << v;
    o << "\n";
  }
  o << "    kv_ratio = " << fmt(d.grid.perm.kv_ratio) << "\n";
  o << "    stddev_frac = " << fmt(d.grid.perm.stddev_frac) << "\n";
  o << "    min_kh = " << fmt(d.grid.perm.min_kh) << "\n";
  o << "    seed = " << d.grid.perm.seed << "\n";
  o << "  }\n}\n";

  const FluidParams& f = d.fluid;
  o << "fluid {\n";
  emit_pair(o, "  ", "xi_ref", f.xi_ref);
  emit_pair(o, "  ", "compressibility", f.compressibility);
  emit_pair(o, "  ", "viscosity", f.viscosity);
  emit_pair(o, "  ", "molar_mass", f.molar_mass);
  emit_pair(o, "  ", "surface_molar_density", f.surface_molar_density);
  o << "  rock_compressibility = " << fmt(f.rock_compressibility) << "\n";
  o << "  p_ref = " << fmt(f.p_ref) << "\n";
  o << "  p_init = " << fmt(f.p_init) << "\n";
  o << "  gravity = " << (f.gravity_on ? "on" : "off") << "\n";
  o << "  flow_coefficient = " << fmt(f.units.darcy) << "\n";
  o << "  gravity_factor = " << fmt(f.units.gravity) << "\n";
  o << "  relperm {\n";
  emit_pair(o, "    ", "exponents", f.relperm.exponent);
  emit_pair(o, "    ", "kr_max", f.relperm.kr_max);
  o << "    s_or = " << fmt(f.relperm.s_or) << "\n";
  o << "    s_gr = " << fmt(f.relperm.s_gr) << "\n";
  o << "  }\n";
  if (!f.pc_gas.empty()) {
    o << "  pc {\n    sg =";
    for (double v : f.pc_gas.sg) o << " " << fmt(v);
    o << "\n    pc =";
    for (double v : f.pc_gas.pc) o << " " << fmt(v);
    o << "\n  }\n";
  }
  o << "}\n";

  o << "wells {\n";
  for (const WellSpec& w : d.wells) {
    o << "  well " << w.name << " {\n";
    o << "    kind = " << w.kind << "\n";
    o << "    component = " << w.component << "\n";
    o << "    i = " << w.i << "\n    j = " << w.j << "\n";
    o << "    k_from = " << w.k_from << "\n    k_to = " << w.k_to << "\n";
    o << "    radius = " << fmt(w.radius) << "\n";
    o << "    skin = " << fmt(w.skin) << "\n";
    o << "    control = " << w.control << " " << fmt(w.target) << "\n";
    if (w.bhp_limit) o << "    bhp_limit = " << fmt(*w.bhp_limit) << "\n";
    o << "  }\n";
  }
  o << "}\n";

  const SolverConfig& s = d.solver;
  o << "solver {\n";
  o << "  method = " << to_string(s.method) << "\n";
  o << "  tiles = " << s.tiles_x << " " << s.tiles_y << "\n";
  o << "  threshold = " << to_string(s.threshold) << "\n";
  o << "  expand_layers = " << s.expand_layers << "\n";
  // A zero block count means "pick the default", which is a quarter of the
  // subdomain count.  The echo records the resolved value so the run is fully
  // described by its own echo file.
  const int n_tiles = s.tiles_x * s.tiles_y;
  const int blocks = s.blocks > 0 ? s.blocks : (n_tiles + 3) / 4;
  o << "  blocks = " << blocks << "\n";
  o << "  boundary = "
    << (s.bc == BoundaryKind::dirichlet_pressure ? "dirichlet" : "fixed_flux")
    << "\n";
  o << "  newton {\n";
  o << "    rtol = " << fmt(s.newton_global.rtol) << "\n";
  o << "    local_rtol = " << fmt(s.newton_local.rtol) << "\n";
  o << "    atol = " << fmt(s.newton_global.atol) << "\n";
  o << "    max_iterations = " << s.newton_global.max_iterations << "\n";
  o << "    max_backtracks = " << s.newton_global.max_backtracks << "\n";
  o << "    dp_cap = " << fmt(s.newton_global.dp_cap) << "\n";
  o << "    ds_cap = " << fmt(s.newton_global.ds_cap) << "\n";
  o << "  }\n";
  o << "  linear {\n";
  o << "    rtol = " << fmt(s.lin_global.rtol) << "\n";
  o << "    local_rtol = " << fmt(s.lin_local.rtol) << "\n";
  o << "    restart = " << s.lin_global.restart << "\n";
  o << "    max_iterations = " << s.lin_global.max_iterations << "\n";
  o << "  }\n";
  o << "  dt {\n";
  o << "    init = " << fmt(s.dt.init) << "\n";
  o << "    min = " << fmt(s.dt.min) << "\n";
  o << "    max = " << fmt(s.dt.max) << "\n";
  o << "    growth = " << fmt(s.dt.growth) << "\n";
  o << "    cut = " << fmt(s.dt.cut) << "\n";
  o << "    target_newton = " << s.dt.target_newton << "\n";
  o << "  }\n}\n";

  o << "schedule {\n";
  o << "  end = " << fmt(d.schedule.end) << "\n";
  o << "  report_times =";
  for (double t : schedule_report_times(d.schedule)) o << " " << fmt(t);
  o << "\n}\n";

  o << "output {\n  snapshots = " << (d.output.snapshots ? "on" : "off")
    << "\n}\n";
  return o.str();
}

std::vector<double> schedule_report_times(const ScheduleSpec& spec) {
  if (spec.end <= 0) throw ConfigError("schedule end must be positive");
  if (!spec.report_times.empty()) {
    std::vector<double> t = spec.report_times;
    if (t.back() < spec.end - 1e-9 * spec.end) t.push_back(spec.end);
    for (double v : t)
      if (v <= 0 || v > spec.end * (1 + 1e-12))
        throw ConfigError("report times must lie in (0, end]");
    return t;
  }
  std::vector<double> t;
  if (spec.report_interval > 0) {
    for (int k = 1; k * spec.report_interval < spec.end - 1e-9 * spec.end; ++k)
      t.push_back(k * spec.report_interval);
  }
  t.push_back(spec.end);
  return t;
}

namespace {

// Deterministic standard normal stream: one draw per call, Box-Muller on the
// raw 64-bit engine output so results match across platforms.
class NormalStream {
 public:
  explicit NormalStream(unsigned long long seed) : state_(seed ? seed : 1) {}
  double next() {
    const double u1 = (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;  // (0,1)
    const double u2 = (next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  // SplitMix64; fixed constants, identical everywhere.
  unsigned long long next_u64() {
    unsigned long long z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  unsigned long long state_;
};

}  // namespace

Grid build_grid(const GridSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1)
    throw ConfigError("grid dims must be positive");
  const PermSpec& p = spec.perm;

  std::vector<int> band_of(spec.nz, 0);
  if (p.kind == "uniform") {
    if (p.kh.size() != 1)
      throw ConfigError("uniform perm wants exactly one kh value");
  } else {
    if (p.bands.empty()) throw ConfigError("banded perm needs 'bands'");
    if (p.bands.size() != p.kh.size())
      throw ConfigError("perm bands and kh lists must match in length");
    int sum = 0;
    for (int b : p.bands) {
      if (b < 1) throw ConfigError("perm band thickness must be positive");
      sum += b;
    }
    if (sum != spec.nz) throw ConfigError("perm bands must sum to nz");
    int k = 0;
    for (size_t b = 0; b < p.bands.size(); ++b)
      for (int r = 0; r < p.bands[b]; ++r) band_of[k++] = static_cast<int>(b);
  }
  for (double v : p.kh)
    if (v <= 0) throw ConfigError("kh values must be positive");

  const int nc = spec.nx * spec.ny * spec.nz;
  std::vector<PermTensor> perm(nc);
  NormalStream rng(p.seed);
  for (int k = 0; k < spec.nz; ++k) {
    const double mean = p.kh[p.kind == "uniform" ? 0 : band_of[k]];
    for (int j = 0; j < spec.ny; ++j) {
      for (int i = 0; i < spec.nx; ++i) {
        double kh = mean;
        if (p.kind == "gaussian_layers")
          kh = std::max(p.min_kh, mean * (1.0 + p.stddev_frac * rng.next()));
        const int c = i + spec.nx * (j + spec.ny * k);
        perm[c] = PermTensor{kh, kh, p.kv_ratio * kh};
      }
    }
  }
  return build_cartesian_grid({spec.nx, spec.ny, spec.nz},
                              {spec.dx, spec.dy, spec.dz}, spec.top_depth,
                              std::move(perm), spec.porosity);
}

std::vector<Well> build_wells(const Deck& deck, const Grid& grid) {
  (void)grid;
  std::vector<Well> out;
  for (const WellSpec& ws : deck.wells) {
    Well w;
    w.name = ws.name;
    w.kind = ws.kind == "injector" ? WellKind::injector : WellKind::producer;
    w.component = ws.component == "gas" ? kGas : kOil;
    w.i = ws.i;
    w.j = ws.j;
    w.k_from = ws.k_from;
    w.k_to = ws.k_to;
    w.radius = ws.radius;
    w.skin = ws.skin;
    if (ws.control == "molar_rate") w.control.kind = ControlKind::molar_rate;
    else if (ws.control == "surface_rate") w.control.kind = ControlKind::surface_rate;
    else w.control.kind = ControlKind::bhp;
    w.control.value = ws.target;
    if (ws.bhp_limit) {
      w.control.bhp_limit = *ws.bhp_limit;
      w.control.has_limit = true;
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace addm
