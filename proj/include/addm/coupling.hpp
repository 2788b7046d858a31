#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "addm/fluid.hpp"
#include "addm/grid.hpp"
#include "addm/types.hpp"

namespace addm {

// Per-cell, per-component magnitude of the saturation change between two
// states, |S(new) - S(old)|, stored interleaved like molar unknowns.
// Inactive cells keep zeros.
Vec saturation_delta(const Grid& grid, const FluidParams& params,
                     const FluidState& older, const FluidState& newer);

enum class ThresholdStrategy { A, B, C, D };

ThresholdStrategy threshold_strategy_from_string(const std::string& s);
std::string to_string(ThresholdStrategy s);

// Saturation-change threshold c_S for the front test. Strategies C and D
// scale a base value by timestep ratios so shrinking steps tighten the
// front detection.
double threshold_value(ThresholdStrategy strategy, double dt_current,
                       double dt_next, double dt_max);

// Cells of the expanded subdomain whose saturation change exceeds the
// threshold in at least one component (strict inequality). Sorted ascending.
std::vector<int> front_cells(const SubdomainLayout& layout, const Grid& grid,
                             int subdomain, int layers, const Vec& delta,
                             double threshold);

// Grouping of subdomains into solve regions for one timestep attempt.
struct CouplingPattern {
  int n_subdomains = 0;
  std::vector<int> region_of;             // per subdomain, dense 0..n_regions-1
  std::vector<std::vector<int>> regions;  // region -> member subdomains, ascending
  std::vector<std::uint8_t> independent;  // per subdomain: 1 when its region is a singleton

  int n_regions() const { return static_cast<int>(regions.size()); }
  bool operator==(const CouplingPattern& o) const {
    return n_subdomains == o.n_subdomains && region_of == o.region_of &&
           regions == o.regions && independent == o.independent;
  }
};

// Every subdomain its own region (the fully decoupled pattern).
CouplingPattern all_independent_pattern(int n_subdomains);

// Builds a pattern from per-subdomain region labels (any values; regions are
// renumbered dense in order of their smallest member subdomain).
CouplingPattern pattern_from_labels(const std::vector<int>& labels);

// Checks structural invariants: labels dense and consistent with the member
// lists, members disjoint and covering, every multi-subdomain region
// connected in the adjacency graph. Throws ConfigError on violation.
void validate_pattern(const CouplingPattern& pattern, const AdjGraph& adj);

// Union-find connected components; the returned label of each vertex is the
// smallest vertex index in its component.
std::vector<int> connected_components(const AdjGraph& graph);

// Couples adjacent subdomains whose expanded fronts overlap, then merges
// transitively through connected components.
CouplingPattern couple_overlap(const SubdomainLayout& layout, const Grid& grid,
                               const AdjGraph& adj, const Vec& delta,
                               double threshold, int layers);

// Couples every subdomain with a nonempty (unexpanded) front to all of its
// neighbors, then merges transitively.
CouplingPattern couple_active_neighborhood(const SubdomainLayout& layout,
                                           const Grid& grid,
                                           const AdjGraph& adj,
                                           const Vec& delta, double threshold);

struct WeightedGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, weight), ascending

  static WeightedGraph from_edges(
      int n, const std::vector<std::tuple<int, int, double>>& edges);
};

// Edge weights for the balanced-partition strategy: for adjacent subdomains
// the weight sums saturation changes over both fronts and their expanded
// overlap; pairs whose one-layer expansions do not overlap get a tiny
// positive weight so the graph stays connected for the partitioner.
WeightedGraph coupling_weight_graph(const SubdomainLayout& layout,
                                    const Grid& grid, const AdjGraph& adj,
                                    const Vec& delta, double threshold,
                                    int layers);

// Partitions the weighted subdomain graph into exactly `blocks` regions
// minimizing the weight cut while keeping block sizes within
// max(ceil(n/K), floor(1.3 n/K)). Defined in partition.cpp.
std::vector<int> partition_weighted_graph(const WeightedGraph& graph,
                                          int blocks);

// Couples through balanced graph partitioning of the weighted adjacency
// graph. `blocks` <= 0 selects the default ceil(n/4).
CouplingPattern couple_balanced_partition(const SubdomainLayout& layout,
                                          const Grid& grid,
                                          const AdjGraph& adj, const Vec& delta,
                                          double threshold, int layers,
                                          int blocks);

}  // namespace addm
