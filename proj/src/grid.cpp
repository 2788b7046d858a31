#include "addm/grid.hpp"

#include <algorithm>
#include <queue>

namespace addm {

int Grid::num_active() const {
  int n = 0;
  for (auto a : active) n += (a != 0);
  return n;
}

double face_geometric_transmissibility(const Grid& grid, const Face& face) {
  const double half[3] = {grid.cell.dx / 2, grid.cell.dy / 2, grid.cell.dz / 2};
  const double areas[3] = {grid.cell.dy * grid.cell.dz,
                           grid.cell.dx * grid.cell.dz,
                           grid.cell.dx * grid.cell.dy};
  auto axis_perm = [&](int c) {
    const PermTensor& p = grid.perm[c];
    return face.axis == 0 ? p.kx : (face.axis == 1 ? p.ky : p.kz);
  };
  const double a = areas[face.axis];
  const double d = half[face.axis];
  const double ka = axis_perm(face.a);
  const double kb = axis_perm(face.b);
  if (ka <= 0 || kb <= 0) return 0.0;
  return 1.0 / (d / (ka * a) + d / (kb * a));
}

Grid build_cartesian_grid(const GridDims& dims, const CellSize& cell,
                          double top_depth, std::vector<PermTensor> perm,
                          double poro, std::vector<std::uint8_t> active) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw ConfigError("grid dimensions must be positive");
  if (cell.dx <= 0 || cell.dy <= 0 || cell.dz <= 0)
    throw ConfigError("cell sizes must be positive");
  if (poro <= 0 || poro >= 1) throw ConfigError("porosity must lie in (0,1)");
  const int n = dims.nx * dims.ny * dims.nz;
  if (static_cast<int>(perm.size()) != n)
    throw ConfigError("permeability field size does not match grid");
  if (active.empty()) active.assign(n, 1);
  if (static_cast<int>(active.size()) != n)
    throw ConfigError("active mask size does not match grid");

  Grid g;
  g.dims = dims;
  g.cell = cell;
  g.top_depth = top_depth;
  g.poro_ref = poro;
  g.perm = std::move(perm);
  g.active = std::move(active);
  g.depth.resize(n);
  for (int k = 0; k < dims.nz; ++k) {
    const double z = top_depth + (k + 0.5) * cell.dz;
    for (int j = 0; j < dims.ny; ++j)
      for (int i = 0; i < dims.nx; ++i) g.depth[g.cell_index(i, j, k)] = z;
  }

  const double areas[3] = {cell.dy * cell.dz, cell.dx * cell.dz,
                           cell.dx * cell.dy};
  const int stride[3] = {1, dims.nx, dims.nx * dims.ny};
  const int ext[3] = {dims.nx, dims.ny, dims.nz};
  // x faces first, then y, then z; within an axis, cell-index order.
  for (int axis = 0; axis < 3; ++axis) {
    for (int k = 0; k < dims.nz; ++k)
      for (int j = 0; j < dims.ny; ++j)
        for (int i = 0; i < dims.nx; ++i) {
          const int idx[3] = {i, j, k};
          if (idx[axis] + 1 >= ext[axis]) continue;
          const int a = g.cell_index(i, j, k);
          const int b = a + stride[axis];
          if (!g.is_active(a) || !g.is_active(b)) continue;
          Face f;
          f.a = a;
          f.b = b;
          f.axis = axis;
          f.area = areas[axis];
          f.trans_geo = face_geometric_transmissibility(g, f);
          g.faces.push_back(f);
        }
  }

  g.cell_face_ptr.assign(n + 1, 0);
  for (const Face& f : g.faces) {
    ++g.cell_face_ptr[f.a + 1];
    ++g.cell_face_ptr[f.b + 1];
  }
  for (int c = 0; c < n; ++c) g.cell_face_ptr[c + 1] += g.cell_face_ptr[c];
  g.cell_face.resize(g.faces.size() * 2);
  std::vector<int> fill(n, 0);
  for (int fi = 0; fi < static_cast<int>(g.faces.size()); ++fi) {
    const Face& f = g.faces[fi];
    g.cell_face[g.cell_face_ptr[f.a] + fill[f.a]++] = fi;
    g.cell_face[g.cell_face_ptr[f.b] + fill[f.b]++] = fi;
  }
  return g;
}

namespace {

// Split n cells into parts sizes differing by at most one, remainder first.
std::vector<int> axis_splits(int n, int parts) {
  std::vector<int> starts(parts + 1, 0);
  const int base = n / parts;
  const int rem = n % parts;
  for (int p = 0; p < parts; ++p)
    starts[p + 1] = starts[p] + base + (p < rem ? 1 : 0);
  return starts;
}

}  // namespace

SubdomainLayout tile_partition(const Grid& grid, int px, int py,
                               int cache_layers) {
  if (px <= 0 || py <= 0) throw ConfigError("tile counts must be positive");
  if (px > grid.dims.nx || py > grid.dims.ny)
    throw ConfigError("tile counts exceed grid extents");
  int active_columns = 0;
  for (int j = 0; j < grid.dims.ny; ++j)
    for (int i = 0; i < grid.dims.nx; ++i) {
      for (int k = 0; k < grid.dims.nz; ++k)
        if (grid.is_active(grid.cell_index(i, j, k))) {
          ++active_columns;
          break;
        }
    }
  if (px * py > active_columns)
    throw ConfigError("more tiles than active columns");

  SubdomainLayout lay;
  lay.px = px;
  lay.py = py;
  lay.n_sub = px * py;
  lay.owner.assign(grid.num_cells(), -1);
  lay.cells.resize(lay.n_sub);

  const auto sx = axis_splits(grid.dims.nx, px);
  const auto sy = axis_splits(grid.dims.ny, py);
  std::vector<int> tile_of_i(grid.dims.nx), tile_of_j(grid.dims.ny);
  for (int t = 0; t < px; ++t)
    for (int i = sx[t]; i < sx[t + 1]; ++i) tile_of_i[i] = t;
  for (int t = 0; t < py; ++t)
    for (int j = sy[t]; j < sy[t + 1]; ++j) tile_of_j[j] = t;

  for (int k = 0; k < grid.dims.nz; ++k)
    for (int j = 0; j < grid.dims.ny; ++j)
      for (int i = 0; i < grid.dims.nx; ++i) {
        const int c = grid.cell_index(i, j, k);
        if (!grid.is_active(c)) continue;
        const int s = tile_of_i[i] + px * tile_of_j[j];
        lay.owner[c] = s;
        lay.cells[s].push_back(c);
      }
  for (auto& v : lay.cells) std::sort(v.begin(), v.end());

  lay.cached_layers = cache_layers;
  lay.expansions.resize(lay.n_sub);
  for (int s = 0; s < lay.n_sub; ++s) {
    lay.expansions[s].resize(cache_layers + 1);
    lay.expansions[s][0] = lay.cells[s];
    for (int l = 1; l <= cache_layers; ++l) {
      // Grow one BFS layer from the previous expansion.
      const auto& prev = lay.expansions[s][l - 1];
      std::vector<std::uint8_t> in(grid.num_cells(), 0);
      for (int c : prev) in[c] = 1;
      std::vector<int> next = prev;
      for (int c : prev)
        for (int e = grid.cell_face_ptr[c]; e < grid.cell_face_ptr[c + 1];
             ++e) {
          const Face& f = grid.faces[grid.cell_face[e]];
          const int o = (f.a == c) ? f.b : f.a;
          if (!in[o]) {
            in[o] = 1;
            next.push_back(o);
          }
        }
      std::sort(next.begin(), next.end());
      lay.expansions[s][l] = std::move(next);
    }
  }
  return lay;
}

std::vector<int> expand_subdomain(const SubdomainLayout& layout,
                                  const Grid& grid, int k, int l) {
  if (k < 0 || k >= layout.n_sub) throw ConfigError("subdomain out of range");
  if (l < 0) throw ConfigError("expansion layers must be non-negative");
  if (l <= layout.cached_layers) return layout.expansions[k][l];
  std::vector<int> cur = layout.expansions[k][layout.cached_layers];
  std::vector<std::uint8_t> in(grid.num_cells(), 0);
  for (int c : cur) in[c] = 1;
  for (int step = layout.cached_layers; step < l; ++step) {
    std::vector<int> frontier;
    for (int c : cur)
      for (int e = grid.cell_face_ptr[c]; e < grid.cell_face_ptr[c + 1]; ++e) {
        const Face& f = grid.faces[grid.cell_face[e]];
        const int o = (f.a == c) ? f.b : f.a;
        if (!in[o]) {
          in[o] = 1;
          frontier.push_back(o);
        }
      }
    cur.insert(cur.end(), frontier.begin(), frontier.end());
  }
  std::sort(cur.begin(), cur.end());
  return cur;
}

AdjGraph AdjGraph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  AdjGraph g;
  g.n = n;
  g.edges = std::move(edges);
  g.nbrs.resize(n);
  for (const auto& [u, v] : g.edges) {
    g.nbrs[u].push_back(v);
    g.nbrs[v].push_back(u);
  }
  for (auto& v : g.nbrs) std::sort(v.begin(), v.end());
  return g;
}

AdjGraph subdomain_adjacency(const SubdomainLayout& layout, const Grid& grid) {
  std::vector<std::pair<int, int>> edges;
  for (const Face& f : grid.faces) {
    const int sa = layout.owner[f.a];
    const int sb = layout.owner[f.b];
    if (sa >= 0 && sb >= 0 && sa != sb) edges.emplace_back(sa, sb);
  }
  return AdjGraph::from_edges(layout.n_sub, std::move(edges));
}

}  // namespace addm
