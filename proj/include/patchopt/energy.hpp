#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "patchopt/errors.hpp"

namespace patchopt {

// Cost values are doubles where +infinity is the hard-constraint sentinel.
// Sums and mins behave as expected (inf + finite = inf, min(inf, v) = v);
// negative infinity and NaN are never valid table entries.
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

inline bool is_finite_cost(double c) { return std::isfinite(c); }

// A cost table over an ordered set of variables. The table is flat and
// indexed by the mixed-radix code of the scope labels, first scope variable
// most significant.
struct Factor {
    std::vector<int> scope;
    std::vector<double> table;
};

struct FactorGraph {
    int num_vars = 0;
    std::vector<int> label_counts;  // one per variable, >= 1
    std::vector<Factor> factors;

    int labels_of(int var) const { return label_counts[var]; }

    // Throws InputError if any structural invariant is broken.
    void validate() const;
};

struct Labeling {
    std::vector<int> values;
};

// Mixed-radix encoding of an assignment, first digit most significant.
std::uint64_t encode_assignment(std::span<const int> values,
                                std::span<const int> radices);
std::vector<int> decode_assignment(std::uint64_t code,
                                   std::span<const int> radices);

// Projection of a full labeling onto a scope, in scope order.
std::vector<int> restrict_to(const Labeling& x, std::span<const int> scope);

// Total energy: sum of factor table lookups. +infinity if any factor is at
// the sentinel.
double evaluate(const FactorGraph& graph, const Labeling& x);

struct BruteForceResult {
    Labeling labeling;
    double energy = kInfiniteCost;
};

// Exhaustive search over all assignments. Ties resolve to the
// lexicographically smallest labeling. Throws CapacityError when the
// assignment count exceeds the cap.
BruteForceResult brute_force_min(const FactorGraph& graph,
                                 std::uint64_t cap = std::uint64_t(1) << 24);

}  // namespace patchopt
