#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "patchopt/simplex.hpp"
#include "patchopt/supergraph.hpp"

namespace patchopt {

// Patch states are bitmasks: row-major, top-left pixel = least significant
// bit (bit i*s+j for row i, column j). This differs from the super-node
// label encoding (first scope variable most significant); the two are
// related by reversing the s*s low bits.
std::uint64_t reverse_bits(std::uint64_t v, int n);

struct PatchCostTable {
    int side = 0;
    std::vector<std::uint64_t> allowed;  // ascending bitmasks
    std::vector<double> costs;           // parallel to allowed, >= 0 radians

    double cost_of(std::uint64_t mask) const;  // infinity if not allowed
    bool is_allowed(std::uint64_t mask) const;
};

struct Window {
    int side = 0;
    std::vector<std::uint8_t> pixels;  // row-major 0/1
    double curvature = 0;              // radians, >= 0
};

struct ConstraintRow {
    std::vector<std::pair<int, int>> coeffs;  // (state index, multiplicity)
    double rhs = 0;
};

struct ConstraintSystem {
    int patch_side = 0;
    std::vector<std::uint64_t> states;  // ascending bitmasks, the variables
    std::vector<ConstraintRow> rows;
};

// Hard-coded 2x2 costs: uniform and axis half/half states 0, single
// minority pixel pi/2, the two checkerboard diagonals 2*pi.
PatchCostTable two_by_two_costs();

// Closure of a window under the order-16 group generated by 90-degree
// rotation, horizontal reflection, and 0/1 inversion. Curvature is carried
// over unchanged; duplicates removed.
std::vector<Window> generate_symmetry_orbit(const Window& w);

// The 5x5 windows of the pi/4 (3x3-patch) model with their curvatures,
// expanded by symmetry. 64 windows.
std::vector<Window> canonical_windows();

// Windows for the pi/8 (5x5-patch) model: for every ordered pair of
// boundary directions (multiples of 2*pi/num_dirs) with turning angle in
// [0, 3*pi/4], rasterize the two-segment polyline whose corner sits at the
// pixel-crack point (+0.5, -0.5) from the window center; a pixel is
// foreground iff its center lies strictly left of the polyline, ties to
// background. Uniform windows are dropped; the set is symmetry-expanded
// and deduplicated keeping the smallest curvature.
std::vector<Window> rasterize_windows(int window_side = 9, int num_dirs = 16);

// Variables = patch states occurring in some window; one (deduplicated)
// equality per window: sum over all interior patch positions of the state
// variable, with multiplicity, equals the window curvature.
ConstraintSystem assemble_constraints(const std::vector<Window>& windows,
                                      int patch_side);

// Minimizes a seeded random objective (uniform [0.5, 1.5] coefficients)
// over the system with x >= 0. Throws ModelError with the certificate row
// if infeasible. Tiny negative solution entries (>= -1e-10) clamp to 0.
PatchCostTable solve_patch_costs(const ConstraintSystem& system,
                                 unsigned seed);

// Lifted segmentation energy: sliding s x s patches over a width x height
// grid, labels restricted to the table's allowed states, unaries
// lambda*cost + data term split 1/k_i over the k_i patches containing each
// pixel. Arc consistency runs when the table excludes some states.
SuperGraph build_segmentation_instance(
    const std::vector<std::array<double, 2>>& data, int width, int height,
    double lambda, const PatchCostTable& table, bool arc_consistency = true);

// Same energy as an ordinary factor graph (per-pixel unaries plus one
// patch-sized factor per patch position), for brute-force oracles.
FactorGraph segmentation_factor_graph(
    const std::vector<std::array<double, 2>>& data, int width, int height,
    double lambda, const PatchCostTable& table);

// The 2x2 model rewritten as an 8-connected pairwise energy: per patch,
// +lambda*pi/2 on disagreeing side pairs and -lambda*pi/2 on disagreeing
// diagonal pairs reproduces the 2x2 table exactly.
FactorGraph two_by_two_pairwise_graph(
    const std::vector<std::array<double, 2>>& data, int width, int height,
    double lambda);

struct BoundaryHistogram {
    std::size_t axis = 0;      // unit segments in horizontal/vertical runs
    std::size_t diagonal = 0;  // unit segments in 1-1 staircases (45 deg)
    std::size_t other = 0;     // all remaining boundary unit segments
    std::size_t total = 0;
};

// Classifies the crack boundary of a binary image by tracing its loops,
// run-length encoding the unit moves, and detecting staircase patterns.
BoundaryHistogram boundary_direction_histogram(
    const std::vector<std::uint8_t>& foreground, int width, int height);

}  // namespace patchopt
