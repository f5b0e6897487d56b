#include "patchopt/energy.hpp"

#include <algorithm>

namespace patchopt {

void FactorGraph::validate() const {
    if (num_vars < 0 || static_cast<int>(label_counts.size()) != num_vars)
        throw InputError("label_counts size does not match num_vars");
    for (int c : label_counts)
        if (c < 1) throw InputError("every variable needs at least one label");
    for (const Factor& f : factors) {
        if (f.scope.empty()) throw InputError("factor scope is empty");
        std::uint64_t cells = 1;
        int prev = -1;
        for (int v : f.scope) {
            if (v < 0 || v >= num_vars) throw InputError("factor scope variable out of range");
            if (v <= prev) throw InputError("factor scope must be strictly increasing");
            prev = v;
            cells *= static_cast<std::uint64_t>(label_counts[v]);
        }
        if (f.table.size() != cells)
            throw InputError("factor table size does not match scope label counts");
        for (double e : f.table)
            if (std::isnan(e) || e == -kInfiniteCost)
                throw InputError("factor table entry is NaN or -inf");
    }
}

std::uint64_t encode_assignment(std::span<const int> values,
                                std::span<const int> radices) {
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < values.size(); ++k)
        code = code * static_cast<std::uint64_t>(radices[k]) +
               static_cast<std::uint64_t>(values[k]);
    return code;
}

std::vector<int> decode_assignment(std::uint64_t code,
                                   std::span<const int> radices) {
    std::vector<int> values(radices.size());
    for (std::size_t k = radices.size(); k-- > 0;) {
        std::uint64_t r = static_cast<std::uint64_t>(radices[k]);
        values[k] = static_cast<int>(code % r);
        code /= r;
    }
    return values;
}

std::vector<int> restrict_to(const Labeling& x, std::span<const int> scope) {
    std::vector<int> out;
    out.reserve(scope.size());
    for (int v : scope) out.push_back(x.values[v]);
    return out;
}

namespace {

double factor_value(const FactorGraph& graph, const Factor& f, const Labeling& x) {
    std::uint64_t idx = 0;
    for (int v : f.scope)
        idx = idx * static_cast<std::uint64_t>(graph.label_counts[v]) +
              static_cast<std::uint64_t>(x.values[v]);
    return f.table[idx];
}

}  // namespace

double evaluate(const FactorGraph& graph, const Labeling& x) {
    if (static_cast<int>(x.values.size()) != graph.num_vars)
        throw InputError("labeling length does not match num_vars");
    for (int v = 0; v < graph.num_vars; ++v)
        if (x.values[v] < 0 || x.values[v] >= graph.label_counts[v])
            throw InputError("label out of range");
    double sum = 0;
    for (const Factor& f : graph.factors) {
        double e = factor_value(graph, f, x);
        if (!is_finite_cost(e)) return kInfiniteCost;
        sum += e;
    }
    return sum;
}

BruteForceResult brute_force_min(const FactorGraph& graph, std::uint64_t cap) {
    graph.validate();
    long double total = 1;
    for (int c : graph.label_counts) total *= c;
    if (total > static_cast<long double>(cap))
        throw CapacityError("assignment count exceeds brute-force cap");

    std::uint64_t count = static_cast<std::uint64_t>(total);
    BruteForceResult best;
    Labeling x{std::vector<int>(graph.num_vars, 0)};
    // Enumerate in lexicographic order; strict improvement keeps the
    // lexicographically smallest minimizer.
    for (std::uint64_t it = 0; it < count; ++it) {
        double e = evaluate(graph, x);
        if (e < best.energy) {
            best.energy = e;
            best.labeling = x;
        }
        // increment mixed-radix counter, last variable least significant
        for (int v = graph.num_vars - 1; v >= 0; --v) {
            if (++x.values[v] < graph.label_counts[v]) break;
            x.values[v] = 0;
        }
    }
    if (best.labeling.values.empty() && graph.num_vars > 0)
        best.labeling.values.assign(graph.num_vars, 0);
    return best;
}

}  // namespace patchopt
