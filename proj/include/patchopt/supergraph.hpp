#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "patchopt/energy.hpp"

namespace patchopt {

// Optional regular-grid layout of a cover: patches are side x side squares
// slid over a width x height pixel grid.
struct GridCoverGeometry {
    int width = 0;
    int height = 0;
    int side = 0;
    int stride = 1;
};

struct PatchCover {
    std::vector<std::vector<int>> patches;  // sorted, duplicate-free variable sets
    std::optional<GridCoverGeometry> grid;
};

// Sliding s x s patches with stride 1 in row-major order.
PatchCover make_grid_cover(int width, int height, int side);

struct SuperNode {
    std::vector<int> scope;            // base variables, ascending
    std::vector<std::uint64_t> labels; // admissible assignments, ascending
                                       // mixed-radix codes over the scope
    std::vector<double> unary;
};

// Per-endpoint label grouping by the assignment of the shared variables.
// Group g on one side corresponds to group g on the other: labels agree on
// the overlap iff they are in equal-indexed groups.
struct EdgeSide {
    std::vector<int> order;         // label indices, grouped contiguously
    std::vector<int> group_begin;   // size num_groups+1, offsets into order
    std::vector<int> group_of_label;
};

struct ConsistencyEdge {
    int a = -1;
    int b = -1;
    std::vector<int> overlap;  // shared base variables, ascending
    int num_groups = 0;
    EdgeSide side_a;
    EdgeSide side_b;
};

struct SuperLabeling {
    std::vector<int> values;  // index into each node's label list
};

struct SuperGraph {
    int base_num_vars = 0;
    std::vector<int> base_label_counts;
    std::vector<SuperNode> nodes;
    std::vector<ConsistencyEdge> edges;
    std::vector<int> patch_membership;  // per base variable, #patches containing it

    // Recomputes every edge's group layout from the current label lists.
    void rebuild_edge_groups();
};

struct DecodeResult {
    Labeling labeling;
    bool consistent = false;
};

// All assignments of a patch scope in ascending code order, optionally
// filtered. Throws ModelError if the filter leaves nothing.
std::vector<std::uint64_t> enumerate_patch_labels(
    std::span<const int> scope, std::span<const int> label_counts,
    const std::vector<std::uint64_t>* allowed = nullptr);

// Edges connecting overlapping patches such that every shared variable set
// induces a connected subgraph. Grid covers with stride 1 get the
// 4-connected patch lattice; general covers start from all intersecting
// pairs and greedily drop redundant edges.
std::vector<std::pair<int, int>> select_consistency_edges(const PatchCover& cover);

bool verify_edge_sufficiency(const PatchCover& cover,
                             std::span<const std::pair<int, int>> edges);

// Lifts a factor graph onto a cover. Each factor of arity >= 2 folds into
// the first covering patch; single-variable factors are split 1/k over the
// k patches containing the variable.
SuperGraph build_super_graph(const FactorGraph& graph, const PatchCover& cover);

// Node-level construction for models whose unaries are given directly
// (pruned label lists allowed). Edges are selected from the cover.
SuperGraph build_super_graph_direct(int base_num_vars,
                                    std::vector<int> base_label_counts,
                                    const PatchCover& cover,
                                    std::vector<std::vector<std::uint64_t>> labels,
                                    std::vector<std::vector<double>> unaries);

// Deletes labels whose overlap assignment has no counterpart across some
// edge, to a fixed point. Such labels only have infinite-cost completions,
// so the optimum is unchanged. Throws ModelError if a node empties.
void apply_arc_consistency(SuperGraph& sg);

double super_energy(const SuperGraph& sg, const SuperLabeling& X);

// Base labeling from the lowest-indexed containing patch per variable,
// plus an agreement flag. Disagreement is reported, never thrown.
DecodeResult decode(const SuperGraph& sg, const SuperLabeling& X);

// Super labeling matching a base labeling; nullopt if some node's pruned
// label list cannot represent it.
std::optional<SuperLabeling> lift(const SuperGraph& sg, const Labeling& x);

}  // namespace patchopt
