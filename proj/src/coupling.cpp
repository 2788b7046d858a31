#include "addm/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace addm {

Vec saturation_delta(const Grid& grid, const FluidParams& params,
                     const FluidState& older, const FluidState& newer) {
  const int nc = grid.num_cells();
  Vec delta(static_cast<size_t>(2 * nc), 0.0);
  for (int c = 0; c < nc; ++c) {
    if (!grid.is_active(c)) continue;
    const Saturations a = saturations_from_state(params, older.pressure[c],
                                                 &older.moles[2 * c]);
    const Saturations b = saturations_from_state(params, newer.pressure[c],
                                                 &newer.moles[2 * c]);
    if (!a.ok || !b.ok) continue;
    delta[2 * c + kOil] = std::abs(b.s[kOil] - a.s[kOil]);
    delta[2 * c + kGas] = std::abs(b.s[kGas] - a.s[kGas]);
  }
  return delta;
}

ThresholdStrategy threshold_strategy_from_string(const std::string& s) {
  if (s == "A" || s == "a") return ThresholdStrategy::A;
  if (s == "B" || s == "b") return ThresholdStrategy::B;
  if (s == "C" || s == "c") return ThresholdStrategy::C;
  if (s == "D" || s == "d") return ThresholdStrategy::D;
  throw ConfigError("unknown threshold strategy '" + s + "' (expected A, B, C or D)");
}

std::string to_string(ThresholdStrategy s) {
  switch (s) {
    case ThresholdStrategy::A: return "A";
    case ThresholdStrategy::B: return "B";
    case ThresholdStrategy::C: return "C";
    case ThresholdStrategy::D: return "D";
  }
  return "?";
}

double threshold_value(ThresholdStrategy strategy, double dt_current,
                       double dt_next, double dt_max) {
  switch (strategy) {
    case ThresholdStrategy::A:
      return 5e-3;
    case ThresholdStrategy::B:
      return 1e-3;
    case ThresholdStrategy::C:
      if (dt_max <= 0) throw ConfigError("threshold strategy C needs dt_max > 0");
      return 1e-3 * dt_current / dt_max;
    case ThresholdStrategy::D:
      if (dt_next <= 0) throw ConfigError("threshold strategy D needs dt_next > 0");
      return 1e-3 * dt_current / dt_next;
  }
  throw ConfigError("bad threshold strategy");
}

namespace {

// Per-cell flag: saturation change exceeds the threshold in some component.
std::vector<std::uint8_t> hot_cells(const Grid& grid, const Vec& delta,
                                    double threshold) {
  const int nc = grid.num_cells();
  std::vector<std::uint8_t> hot(static_cast<size_t>(nc), 0);
  for (int c = 0; c < nc; ++c) {
    if (delta[2 * c + kOil] > threshold || delta[2 * c + kGas] > threshold)
      hot[c] = 1;
  }
  return hot;
}

std::vector<int> filter_hot(const std::vector<int>& cells,
                            const std::vector<std::uint8_t>& hot) {
  std::vector<int> out;
  for (int c : cells)
    if (hot[c]) out.push_back(c);
  return out;
}

bool sorted_intersects(const std::vector<int>& a, const std::vector<int>& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else return true;
  }
  return false;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller index as the root so labels are canonical.
    if (a < b) parent[b] = a;
    else parent[a] = b;
  }
};

}  // namespace

std::vector<int> front_cells(const SubdomainLayout& layout, const Grid& grid,
                             int subdomain, int layers, const Vec& delta,
                             double threshold) {
  const std::vector<std::uint8_t> hot = hot_cells(grid, delta, threshold);
  return filter_hot(expand_subdomain(layout, grid, subdomain, layers), hot);
}

CouplingPattern all_independent_pattern(int n_subdomains) {
  CouplingPattern p;
  p.n_subdomains = n_subdomains;
  p.region_of.resize(n_subdomains);
  std::iota(p.region_of.begin(), p.region_of.end(), 0);
  p.regions.resize(n_subdomains);
  for (int k = 0; k < n_subdomains; ++k) p.regions[k] = {k};
  p.independent.assign(n_subdomains, 1);
  return p;
}

CouplingPattern pattern_from_labels(const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  CouplingPattern p;
  p.n_subdomains = n;
  p.region_of.assign(n, -1);
  // Dense region ids in order of first appearance, which for
  // smallest-member-first labels equals ordering by smallest member.
  std::vector<int> remap;  // region id -> original label
  for (int k = 0; k < n; ++k) {
    const int lab = labels[k];
    int id = -1;
    for (size_t r = 0; r < remap.size(); ++r)
      if (remap[r] == lab) { id = static_cast<int>(r); break; }
    if (id < 0) {
      id = static_cast<int>(remap.size());
      remap.push_back(lab);
      p.regions.emplace_back();
    }
    p.region_of[k] = id;
    p.regions[id].push_back(k);
  }
  p.independent.assign(n, 0);
  for (int k = 0; k < n; ++k)
    if (p.regions[p.region_of[k]].size() == 1) p.independent[k] = 1;
  return p;
}

void validate_pattern(const CouplingPattern& pattern, const AdjGraph& adj) {
  const int n = pattern.n_subdomains;
  if (adj.n != n) throw ConfigError("pattern/adjacency size mismatch");
  if (static_cast<int>(pattern.region_of.size()) != n ||
      static_cast<int>(pattern.independent.size()) != n)
    throw ConfigError("pattern arrays sized inconsistently");
  std::vector<std::uint8_t> seen(n, 0);
  for (int r = 0; r < pattern.n_regions(); ++r) {
    const auto& mem = pattern.regions[r];
    if (mem.empty()) throw ConfigError("pattern has an empty region");
    if (!std::is_sorted(mem.begin(), mem.end()))
      throw ConfigError("pattern region members not ascending");
    for (int k : mem) {
      if (k < 0 || k >= n) throw ConfigError("pattern member out of range");
      if (seen[k]) throw ConfigError("subdomain in two regions");
      seen[k] = 1;
      if (pattern.region_of[k] != r)
        throw ConfigError("region_of inconsistent with region members");
      if ((pattern.independent[k] != 0) != (mem.size() == 1))
        throw ConfigError("independent flag inconsistent with region size");
    }
    if (mem.size() > 1) {
      // Connectivity within the subdomain adjacency graph.
      std::vector<std::uint8_t> in_region(n, 0);
      for (int k : mem) in_region[k] = 1;
      std::vector<int> stack = {mem[0]};
      std::vector<std::uint8_t> visited(n, 0);
      visited[mem[0]] = 1;
      size_t count = 1;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj.nbrs[u]) {
          if (in_region[v] && !visited[v]) {
            visited[v] = 1;
            ++count;
            stack.push_back(v);
          }
        }
      }
      if (count != mem.size())
        throw ConfigError("multi-subdomain region is disconnected");
    }
  }
  for (int k = 0; k < n; ++k)
    if (!seen[k]) throw ConfigError("subdomain missing from all regions");
}

std::vector<int> connected_components(const AdjGraph& graph) {
  UnionFind uf(graph.n);
  for (const auto& [u, v] : graph.edges) uf.unite(u, v);
  std::vector<int> label(graph.n);
  for (int v = 0; v < graph.n; ++v) label[v] = uf.find(v);
  return label;
}

CouplingPattern couple_overlap(const SubdomainLayout& layout, const Grid& grid,
                               const AdjGraph& adj, const Vec& delta,
                               double threshold, int layers) {
  const std::vector<std::uint8_t> hot = hot_cells(grid, delta, threshold);
  std::vector<std::vector<int>> front(layout.n_sub);
  for (int k = 0; k < layout.n_sub; ++k)
    front[k] = filter_hot(expand_subdomain(layout, grid, k, layers), hot);

  std::vector<std::pair<int, int>> coupled;
  for (const auto& [i, j] : adj.edges)
    if (sorted_intersects(front[i], front[j])) coupled.emplace_back(i, j);

  const AdjGraph sub = AdjGraph::from_edges(layout.n_sub, std::move(coupled));
  return pattern_from_labels(connected_components(sub));
}

CouplingPattern couple_active_neighborhood(const SubdomainLayout& layout,
                                           const Grid& grid,
                                           const AdjGraph& adj,
                                           const Vec& delta, double threshold) {
  const std::vector<std::uint8_t> hot = hot_cells(grid, delta, threshold);
  std::vector<std::uint8_t> active(layout.n_sub, 0);
  for (int k = 0; k < layout.n_sub; ++k) {
    for (int c : layout.cells[k]) {
      if (hot[c]) {
        active[k] = 1;
        break;
      }
    }
  }
  std::vector<std::pair<int, int>> coupled;
  for (const auto& [i, j] : adj.edges)
    if (active[i] || active[j]) coupled.emplace_back(i, j);

  const AdjGraph sub = AdjGraph::from_edges(layout.n_sub, std::move(coupled));
  return pattern_from_labels(connected_components(sub));
}

WeightedGraph WeightedGraph::from_edges(
    int n, const std::vector<std::tuple<int, int, double>>& edges) {
  WeightedGraph g;
  g.n = n;
  g.adj.resize(n);
  for (const auto& [u, v, w] : edges) {
    if (u == v || u < 0 || v < 0 || u >= n || v >= n)
      throw ConfigError("bad weighted-graph edge");
    g.adj[u].emplace_back(v, w);
    g.adj[v].emplace_back(u, w);
  }
  for (auto& lst : g.adj) std::sort(lst.begin(), lst.end());
  return g;
}

WeightedGraph coupling_weight_graph(const SubdomainLayout& layout,
                                    const Grid& grid, const AdjGraph& adj,
                                    const Vec& delta, double threshold,
                                    int layers) {
  const std::vector<std::uint8_t> hot = hot_cells(grid, delta, threshold);
  const int nsub = layout.n_sub;

  std::vector<std::vector<int>> front0(nsub), front1(nsub), frontl(nsub);
  for (int k = 0; k < nsub; ++k) {
    front0[k] = filter_hot(layout.cells[k], hot);
    front1[k] = filter_hot(expand_subdomain(layout, grid, k, 1), hot);
    frontl[k] = layers == 1
                    ? front1[k]
                    : filter_hot(expand_subdomain(layout, grid, k, layers), hot);
  }

  auto sum_delta = [&](const std::vector<int>& cells) {
    double s = 0;
    for (int c : cells) s += delta[2 * c + kOil] + delta[2 * c + kGas];
    return s;
  };

  std::vector<std::tuple<int, int, double>> weighted;
  double total_positive = 0;
  std::vector<size_t> faint;  // indices of edges that get the epsilon weight
  for (const auto& [i, j] : adj.edges) {
    // Pairs whose one-layer fronts overlap carry the measured weight; the
    // overlap term itself uses the configured expansion depth.
    if (sorted_intersects(front1[i], front1[j])) {
      std::vector<int> overlap;
      std::set_intersection(frontl[i].begin(), frontl[i].end(),
                            frontl[j].begin(), frontl[j].end(),
                            std::back_inserter(overlap));
      const double w = sum_delta(front0[i]) + sum_delta(front0[j]) + sum_delta(overlap);
      weighted.emplace_back(i, j, w);
      if (w > 0) total_positive += w;
      else faint.push_back(weighted.size() - 1);
    } else {
      weighted.emplace_back(i, j, 0.0);
      faint.push_back(weighted.size() - 1);
    }
  }
  const double eps = 1e-12 * std::max(1.0, total_positive);
  for (size_t idx : faint) std::get<2>(weighted[idx]) = eps;

  return WeightedGraph::from_edges(nsub, weighted);
}

CouplingPattern couple_balanced_partition(const SubdomainLayout& layout,
                                          const Grid& grid,
                                          const AdjGraph& adj, const Vec& delta,
                                          double threshold, int layers,
                                          int blocks) {
  const int n = layout.n_sub;
  int K = blocks;
  if (K <= 0) K = (n + 3) / 4;
  K = std::min(K, n);
  const WeightedGraph g =
      coupling_weight_graph(layout, grid, adj, delta, threshold, layers);
  std::vector<int> block = partition_weighted_graph(g, K);
  // Canonical labels: smallest member subdomain of each block.
  std::vector<int> smallest(K, -1);
  for (int k = 0; k < n; ++k)
    if (smallest[block[k]] < 0) smallest[block[k]] = k;
  std::vector<int> labels(n);
  for (int k = 0; k < n; ++k) labels[k] = smallest[block[k]];
  return pattern_from_labels(labels);
}

}  // namespace addm
