#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "addm/types.hpp"

namespace addm {

struct GridDims {
  int nx = 0, ny = 0, nz = 0;
};

struct CellSize {
  double dx = 0, dy = 0, dz = 0;  // ft
};

struct PermTensor {
  double kx = 0, ky = 0, kz = 0;  // mD
};

// One interior face between active cells a and b, a < b, adjacent along axis.
struct Face {
  int a = -1, b = -1;
  int axis = 0;           // 0=x, 1=y, 2=z
  double area = 0;        // ft^2
  double trans_geo = 0;   // harmonic geometric transmissibility, mD*ft
};

// Structured Cartesian grid with uniform cell size, per-cell permeability and
// depth, and an active mask. Cell index = i + nx*(j + ny*k); z increases
// downward (depth grows with k).
struct Grid {
  GridDims dims;
  CellSize cell;
  double top_depth = 0;
  double poro_ref = 0;
  std::vector<PermTensor> perm;
  std::vector<double> depth;     // cell-center depth, ft
  std::vector<std::uint8_t> active;
  std::vector<Face> faces;

  // CSR cell -> incident face ids (ascending), for deterministic gather loops.
  std::vector<int> cell_face_ptr;
  std::vector<int> cell_face;

  int num_cells() const { return dims.nx * dims.ny * dims.nz; }
  int num_active() const;
  int cell_index(int i, int j, int k) const {
    return i + dims.nx * (j + dims.ny * k);
  }
  void cell_ijk(int c, int& i, int& j, int& k) const {
    i = c % dims.nx;
    j = (c / dims.nx) % dims.ny;
    k = c / (dims.nx * dims.ny);
  }
  bool is_active(int c) const { return active[c] != 0; }
  double bulk_volume() const { return cell.dx * cell.dy * cell.dz; }
  // Pore volume at reference pressure, used for residual scaling weights.
  double pore_volume_ref() const { return bulk_volume() * poro_ref; }
};

// Harmonic two-point geometric transmissibility for a face (mD*ft):
// 1 / (d_a/(k_a A) + d_b/(k_b A)) with d = half cell size along the axis.
double face_geometric_transmissibility(const Grid& grid, const Face& face);

Grid build_cartesian_grid(const GridDims& dims, const CellSize& cell,
                          double top_depth, std::vector<PermTensor> perm,
                          double poro,
                          std::vector<std::uint8_t> active = {});

// Non-overlapping px-by-py partition into vertical-column tiles. Extents along
// each axis differ by at most one cell (remainder goes to the lowest-index
// tiles). Inactive cells belong to no subdomain (owner -1).
struct SubdomainLayout {
  int n_sub = 0;
  int px = 0, py = 0;
  std::vector<int> owner;                      // per cell, -1 for inactive
  std::vector<std::vector<int>> cells;         // per subdomain, ascending
  int cached_layers = 0;
  // expansions[k][l] = cells of subdomain k expanded by l face-adjacency
  // layers (ascending), l = 0..cached_layers. Inactive cells block expansion.
  std::vector<std::vector<std::vector<int>>> expansions;
};

SubdomainLayout tile_partition(const Grid& grid, int px, int py,
                               int cache_layers = 2);

// Cells within graph distance l of subdomain k (face adjacency, active only).
// Cached values are returned directly; larger l is computed on the fly.
std::vector<int> expand_subdomain(const SubdomainLayout& layout,
                                  const Grid& grid, int k, int l);

// Undirected graph, edges deduplicated, u < v, neighbor lists ascending.
struct AdjGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> nbrs;

  static AdjGraph from_edges(int n, std::vector<std::pair<int, int>> edges);
};

// Subdomain adjacency: edge where some face joins cells of two subdomains.
AdjGraph subdomain_adjacency(const SubdomainLayout& layout, const Grid& grid);

}  // namespace addm
