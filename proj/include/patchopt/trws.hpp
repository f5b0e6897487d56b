#pragma once

#include <cstddef>
#include <vector>

#include "patchopt/supergraph.hpp"

namespace patchopt {

enum class Algorithm { TRWS, LBP };

struct SolverOptions {
    int max_iters = 10000;
    double lb_stall_tolerance = 1e-9;
    int stall_window = 10;
    Algorithm algorithm = Algorithm::TRWS;
    bool record_trace = true;
};

struct TraceEntry {
    int iter = 0;
    double lower_bound = 0;
    double best_energy = 0;
    double ms = 0;
};

struct SolveResult {
    SuperLabeling labeling;   // best primal found
    Labeling base;            // decoded base labeling
    bool consistent = false;  // super labeling agrees on all overlaps
    double energy = kInfiniteCost;
    double lower_bound = -kInfiniteCost;
    double relative_gap = kInfiniteCost;  // (energy - lb) / max(|lb|, 1e-12)
    int iterations = 0;
    std::vector<TraceEntry> trace;
};

// One grouped message update: h[x] = isinf(D[x]) ? inf : gamma*D[x] - m_in[x],
// m_out[y] = min of h over the sender labels sharing y's overlap group, then
// m_out is normalized by its finite minimum, which is returned. Runs in
// O(|L_from| + |L_to|); if ops is non-null it accumulates the exact number of
// inner-loop steps, which is at most 4*(|L_from| + |L_to|).
double send_message_grouped(std::span<const double> D, std::span<const double> m_in,
                            double gamma, const EdgeSide& from, const EdgeSide& to,
                            int num_groups, std::span<double> m_out,
                            std::size_t* ops = nullptr);

// Reference O(|L_from| * |L_to|) implementation of the same update, for
// cross-checking. Returns the normalization constant.
double send_message_naive(std::span<const double> D, std::span<const double> m_in,
                          double gamma, const EdgeSide& from, const EdgeSide& to,
                          std::span<double> m_out);

// Sequential tree-reweighted message passing (or loopy BP) on the super
// graph. Nodes are processed in index order; per-node weights are
// gamma_i = 1 / max(1, max(#forward neighbors, #backward neighbors)).
SolveResult run(const SuperGraph& sg, const SolverOptions& opts = {});

struct PairwiseSolveResult {
    Labeling labeling;
    double energy = kInfiniteCost;
    double lower_bound = -kInfiniteCost;
    int iterations = 0;
};

// TRW-S on an ordinary pairwise factor graph (factors of arity 1 or 2) with
// dense O(L^2) messages. Baseline for comparing against the lifted solver.
PairwiseSolveResult run_pairwise(const FactorGraph& graph,
                                 const SolverOptions& opts = {});

}  // namespace patchopt
