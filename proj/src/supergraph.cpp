#include "patchopt/supergraph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace patchopt {

PatchCover make_grid_cover(int width, int height, int side) {
    if (width < side || height < side)
        throw InputError("grid smaller than patch side");
    PatchCover cover;
    cover.grid = GridCoverGeometry{width, height, side, 1};
    for (int r = 0; r + side <= height; ++r) {
        for (int c = 0; c + side <= width; ++c) {
            std::vector<int> patch;
            patch.reserve(side * side);
            for (int i = 0; i < side; ++i)
                for (int j = 0; j < side; ++j)
                    patch.push_back((r + i) * width + (c + j));
            std::sort(patch.begin(), patch.end());
            cover.patches.push_back(std::move(patch));
        }
    }
    return cover;
}

std::vector<std::uint64_t> enumerate_patch_labels(
    std::span<const int> scope, std::span<const int> label_counts,
    const std::vector<std::uint64_t>* allowed) {
    std::uint64_t total = 1;
    for (int v : scope) total *= static_cast<std::uint64_t>(label_counts[v]);
    std::vector<std::uint64_t> out;
    if (allowed) {
        out = *allowed;
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        for (std::uint64_t code : out)
            if (code >= total) throw InputError("allowed label code out of range");
        if (out.empty()) throw ModelError("patch has no admissible label");
    } else {
        out.resize(total);
        std::iota(out.begin(), out.end(), std::uint64_t(0));
    }
    return out;
}

namespace {

std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

bool is_subset_sorted(const std::vector<int>& small, const std::vector<int>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

// Restriction of a node label (mixed-radix code over `scope`) to a sorted
// subset of the scope, re-encoded over the subset.
std::uint64_t restrict_code(std::uint64_t code, std::span<const int> scope,
                            std::span<const int> subset,
                            std::span<const int> label_counts) {
    // decode digits (first scope variable most significant)
    thread_local std::vector<int> digits;
    digits.assign(scope.size(), 0);
    for (std::size_t k = scope.size(); k-- > 0;) {
        std::uint64_t r = static_cast<std::uint64_t>(label_counts[scope[k]]);
        digits[k] = static_cast<int>(code % r);
        code /= r;
    }
    std::uint64_t out = 0;
    std::size_t pos = 0;
    for (int v : subset) {
        while (scope[pos] != v) ++pos;  // both sorted
        out = out * static_cast<std::uint64_t>(label_counts[v]) +
              static_cast<std::uint64_t>(digits[pos]);
    }
    return out;
}

EdgeSide make_side(const std::vector<std::uint64_t>& keys,
                   const std::unordered_map<std::uint64_t, int>& group_id,
                   int num_groups) {
    EdgeSide side;
    int n = static_cast<int>(keys.size());
    side.group_of_label.resize(n);
    for (int i = 0; i < n; ++i) side.group_of_label[i] = group_id.at(keys[i]);
    side.order.resize(n);
    std::iota(side.order.begin(), side.order.end(), 0);
    std::stable_sort(side.order.begin(), side.order.end(), [&](int x, int y) {
        return side.group_of_label[x] < side.group_of_label[y];
    });
    side.group_begin.assign(num_groups + 1, 0);
    for (int g : side.group_of_label) side.group_begin[g + 1]++;
    for (int g = 0; g < num_groups; ++g) side.group_begin[g + 1] += side.group_begin[g];
    return side;
}

void build_edge_groups(const SuperGraph& sg, ConsistencyEdge& e) {
    const SuperNode& na = sg.nodes[e.a];
    const SuperNode& nb = sg.nodes[e.b];
    auto keys_of = [&](const SuperNode& n) {
        std::vector<std::uint64_t> keys(n.labels.size());
        for (std::size_t i = 0; i < n.labels.size(); ++i)
            keys[i] = restrict_code(n.labels[i], n.scope, e.overlap,
                                    sg.base_label_counts);
        return keys;
    };
    std::vector<std::uint64_t> ka = keys_of(na), kb = keys_of(nb);
    std::vector<std::uint64_t> all = ka;
    all.insert(all.end(), kb.begin(), kb.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::unordered_map<std::uint64_t, int> group_id;
    group_id.reserve(all.size());
    for (std::size_t g = 0; g < all.size(); ++g) group_id[all[g]] = static_cast<int>(g);
    e.num_groups = static_cast<int>(all.size());
    e.side_a = make_side(ka, group_id, e.num_groups);
    e.side_b = make_side(kb, group_id, e.num_groups);
}

}  // namespace

void SuperGraph::rebuild_edge_groups() {
    for (ConsistencyEdge& e : edges) build_edge_groups(*this, e);
}

std::vector<std::pair<int, int>> select_consistency_edges(const PatchCover& cover) {
    if (cover.grid && cover.grid->stride == 1) {
        const GridCoverGeometry& g = *cover.grid;
        int nr = g.height - g.side + 1;
        int nc = g.width - g.side + 1;
        std::vector<std::pair<int, int>> edges;
        for (int r = 0; r < nr; ++r) {
            for (int c = 0; c < nc; ++c) {
                int idx = r * nc + c;
                if (c + 1 < nc) edges.emplace_back(idx, idx + 1);
                if (r + 1 < nr) edges.emplace_back(idx, idx + nc);
            }
        }
        return edges;
    }
    int n = static_cast<int>(cover.patches.size());
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!intersect_sorted(cover.patches[i], cover.patches[j]).empty())
                edges.emplace_back(i, j);
    // One deterministic pruning pass: drop an edge whenever connectivity of
    // every shared-variable-set subgraph survives without it.
    for (std::size_t k = 0; k < edges.size();) {
        auto trial = edges;
        trial.erase(trial.begin() + static_cast<long>(k));
        if (verify_edge_sufficiency(cover, trial))
            edges = std::move(trial);
        else
            ++k;
    }
    return edges;
}

bool verify_edge_sufficiency(const PatchCover& cover,
                             std::span<const std::pair<int, int>> edges) {
    int n = static_cast<int>(cover.patches.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            std::vector<int> gamma = intersect_sorted(cover.patches[i], cover.patches[j]);
            if (gamma.empty()) continue;
            std::vector<int> members;
            for (int k = 0; k < n; ++k)
                if (is_subset_sorted(gamma, cover.patches[k])) members.push_back(k);
            // BFS over the induced subgraph
            std::vector<char> in_set(n, 0), seen(n, 0);
            for (int m : members) in_set[m] = 1;
            std::vector<int> stack{members.front()};
            seen[members.front()] = 1;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (const auto& [a, b] : edges) {
                    int v = -1;
                    if (a == u) v = b;
                    else if (b == u) v = a;
                    if (v >= 0 && in_set[v] && !seen[v]) {
                        seen[v] = 1;
                        stack.push_back(v);
                    }
                }
            }
            for (int m : members)
                if (!seen[m]) return false;
        }
    }
    return true;
}

namespace {

SuperGraph assemble(int base_num_vars, std::vector<int> base_label_counts,
                    const PatchCover& cover,
                    std::vector<std::vector<std::uint64_t>> labels,
                    std::vector<std::vector<double>> unaries) {
    SuperGraph sg;
    sg.base_num_vars = base_num_vars;
    sg.base_label_counts = std::move(base_label_counts);
    sg.patch_membership.assign(base_num_vars, 0);
    for (const auto& patch : cover.patches)
        for (int v : patch) sg.patch_membership[v]++;
    sg.nodes.resize(cover.patches.size());
    for (std::size_t p = 0; p < cover.patches.size(); ++p) {
        SuperNode& node = sg.nodes[p];
        node.scope = cover.patches[p];
        node.labels = std::move(labels[p]);
        node.unary = std::move(unaries[p]);
        if (node.labels.empty()) throw ModelError("super node has no labels");
        if (node.unary.size() != node.labels.size())
            throw InputError("unary vector length mismatch");
    }
    for (auto [a, b] : select_consistency_edges(cover)) {
        ConsistencyEdge e;
        e.a = a;
        e.b = b;
        e.overlap = intersect_sorted(sg.nodes[a].scope, sg.nodes[b].scope);
        sg.edges.push_back(std::move(e));
    }
    sg.rebuild_edge_groups();
    return sg;
}

}  // namespace

SuperGraph build_super_graph(const FactorGraph& graph, const PatchCover& cover) {
    graph.validate();
    int n_patches = static_cast<int>(cover.patches.size());

    std::vector<int> membership(graph.num_vars, 0);
    for (const auto& patch : cover.patches)
        for (int v : patch) membership[v]++;

    std::vector<std::vector<std::uint64_t>> labels(n_patches);
    std::vector<std::vector<double>> unaries(n_patches);
    for (int p = 0; p < n_patches; ++p) {
        labels[p] = enumerate_patch_labels(cover.patches[p], graph.label_counts);
        unaries[p].assign(labels[p].size(), 0.0);
    }

    auto add_factor_to_patch = [&](const Factor& f, int p) {
        const auto& scope = cover.patches[p];
        for (std::size_t li = 0; li < labels[p].size(); ++li) {
            std::vector<int> digits =
                decode_assignment(labels[p][li], [&] {
                    std::vector<int> rad;
                    for (int v : scope) rad.push_back(graph.label_counts[v]);
                    return rad;
                }());
            std::uint64_t idx = 0;
            std::size_t pos = 0;
            for (int v : f.scope) {
                while (scope[pos] != v) ++pos;
                idx = idx * static_cast<std::uint64_t>(graph.label_counts[v]) +
                      static_cast<std::uint64_t>(digits[pos]);
            }
            unaries[p][li] += f.table[idx];
        }
    };

    for (const Factor& f : graph.factors) {
        if (f.scope.size() == 1) {
            int var = f.scope[0];
            int k = membership[var];
            if (k == 0) throw ModelError("unary factor variable not covered by any patch");
            double w = 1.0 / k;
            for (int p = 0; p < n_patches; ++p) {
                if (!std::binary_search(cover.patches[p].begin(),
                                        cover.patches[p].end(), var))
                    continue;
                const auto& scope = cover.patches[p];
                std::vector<int> rad;
                for (int v : scope) rad.push_back(graph.label_counts[v]);
                for (std::size_t li = 0; li < labels[p].size(); ++li) {
                    std::vector<int> digits = decode_assignment(labels[p][li], rad);
                    std::size_t pos = std::lower_bound(scope.begin(), scope.end(), var) -
                                      scope.begin();
                    unaries[p][li] += w * f.table[digits[pos]];
                }
            }
        } else {
            int target = -1;
            for (int p = 0; p < n_patches; ++p) {
                if (is_subset_sorted(f.scope, cover.patches[p])) {
                    target = p;
                    break;
                }
            }
            if (target < 0) throw ModelError("factor scope not covered by any patch");
            add_factor_to_patch(f, target);
        }
    }

    return assemble(graph.num_vars, graph.label_counts, cover, std::move(labels),
                    std::move(unaries));
}

SuperGraph build_super_graph_direct(int base_num_vars,
                                    std::vector<int> base_label_counts,
                                    const PatchCover& cover,
                                    std::vector<std::vector<std::uint64_t>> labels,
                                    std::vector<std::vector<double>> unaries) {
    return assemble(base_num_vars, std::move(base_label_counts), cover,
                    std::move(labels), std::move(unaries));
}

void apply_arc_consistency(SuperGraph& sg) {
    // Sweeps prune labels whose overlap assignment is unrepresented on the
    // other side of some edge; restriction keys are recomputed locally so
    // the (expensive) group layouts are rebuilt only once at the end.
    auto keys_of = [&](const SuperNode& n, const std::vector<int>& overlap) {
        std::vector<std::uint64_t> keys(n.labels.size());
        for (std::size_t i = 0; i < n.labels.size(); ++i)
            keys[i] = restrict_code(n.labels[i], n.scope, overlap,
                                    sg.base_label_counts);
        return keys;
    };
    bool changed = true;
    bool any = false;
    while (changed) {
        changed = false;
        for (const ConsistencyEdge& e : sg.edges) {
            std::vector<std::uint64_t> ka = keys_of(sg.nodes[e.a], e.overlap);
            std::vector<std::uint64_t> kb = keys_of(sg.nodes[e.b], e.overlap);
            auto sorted = [](std::vector<std::uint64_t> v) {
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
                return v;
            };
            std::vector<std::uint64_t> sa = sorted(ka), sb = sorted(kb);
            auto prune = [&](int node_idx, const std::vector<std::uint64_t>& keys,
                             const std::vector<std::uint64_t>& other) {
                SuperNode& n = sg.nodes[node_idx];
                std::vector<std::uint64_t> keep_labels;
                std::vector<double> keep_unary;
                for (std::size_t i = 0; i < n.labels.size(); ++i) {
                    if (std::binary_search(other.begin(), other.end(), keys[i])) {
                        keep_labels.push_back(n.labels[i]);
                        keep_unary.push_back(n.unary[i]);
                    }
                }
                if (keep_labels.size() == n.labels.size()) return false;
                if (keep_labels.empty())
                    throw ModelError("arc consistency emptied a super node");
                n.labels = std::move(keep_labels);
                n.unary = std::move(keep_unary);
                return true;
            };
            if (prune(e.a, ka, sb)) changed = any = true;
            if (prune(e.b, kb, sa)) changed = any = true;
        }
    }
    if (any) sg.rebuild_edge_groups();
}

double super_energy(const SuperGraph& sg, const SuperLabeling& X) {
    if (X.values.size() != sg.nodes.size())
        throw InputError("super labeling length mismatch");
    double sum = 0;
    for (std::size_t p = 0; p < sg.nodes.size(); ++p) {
        int li = X.values[p];
        if (li < 0 || li >= static_cast<int>(sg.nodes[p].labels.size()))
            throw InputError("super label index out of range");
        double u = sg.nodes[p].unary[li];
        if (!is_finite_cost(u)) return kInfiniteCost;
        sum += u;
    }
    for (const ConsistencyEdge& e : sg.edges) {
        int ga = e.side_a.group_of_label[X.values[e.a]];
        int gb = e.side_b.group_of_label[X.values[e.b]];
        if (ga != gb) return kInfiniteCost;
    }
    return sum;
}

DecodeResult decode(const SuperGraph& sg, const SuperLabeling& X) {
    DecodeResult res;
    res.labeling.values.assign(sg.base_num_vars, -1);
    res.consistent = true;
    for (std::size_t p = 0; p < sg.nodes.size(); ++p) {
        const SuperNode& n = sg.nodes[p];
        std::vector<int> rad;
        for (int v : n.scope) rad.push_back(sg.base_label_counts[v]);
        std::vector<int> digits = decode_assignment(n.labels[X.values[p]], rad);
        for (std::size_t k = 0; k < n.scope.size(); ++k) {
            int v = n.scope[k];
            if (res.labeling.values[v] < 0)
                res.labeling.values[v] = digits[k];
            else if (res.labeling.values[v] != digits[k])
                res.consistent = false;
        }
    }
    for (int v = 0; v < sg.base_num_vars; ++v)
        if (res.labeling.values[v] < 0) res.labeling.values[v] = 0;
    return res;
}

std::optional<SuperLabeling> lift(const SuperGraph& sg, const Labeling& x) {
    SuperLabeling X;
    X.values.reserve(sg.nodes.size());
    for (const SuperNode& n : sg.nodes) {
        std::vector<int> rad, vals;
        for (int v : n.scope) {
            rad.push_back(sg.base_label_counts[v]);
            vals.push_back(x.values[v]);
        }
        std::uint64_t code = encode_assignment(vals, rad);
        auto it = std::lower_bound(n.labels.begin(), n.labels.end(), code);
        if (it == n.labels.end() || *it != code) return std::nullopt;
        X.values.push_back(static_cast<int>(it - n.labels.begin()));
    }
    return X;
}

}  // namespace patchopt
