#include "patchopt/trws.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace patchopt {

double send_message_grouped(std::span<const double> D, std::span<const double> m_in,
                            double gamma, const EdgeSide& from, const EdgeSide& to,
                            int num_groups, std::span<double> m_out,
                            std::size_t* ops) {
    thread_local std::vector<double> group_min;
    group_min.assign(num_groups, kInfiniteCost);
    std::size_t n_ops = 0;
    const std::size_t nf = D.size();
    for (std::size_t x = 0; x < nf; ++x) {
        double h = std::isinf(D[x]) ? kInfiniteCost : gamma * D[x] - m_in[x];
        double& g = group_min[from.group_of_label[x]];
        if (h < g) g = h;
        ++n_ops;
    }
    double delta = kInfiniteCost;
    const std::size_t nt = m_out.size();
    for (std::size_t y = 0; y < nt; ++y) {
        double v = group_min[to.group_of_label[y]];
        m_out[y] = v;
        if (v < delta) delta = v;
        ++n_ops;
    }
    if (!std::isfinite(delta)) delta = 0;  // fully blocked message
    for (std::size_t y = 0; y < nt; ++y) {
        m_out[y] -= delta;
        ++n_ops;
    }
    if (ops) *ops += n_ops;
    return delta;
}

double send_message_naive(std::span<const double> D, std::span<const double> m_in,
                          double gamma, const EdgeSide& from, const EdgeSide& to,
                          std::span<double> m_out) {
    for (std::size_t y = 0; y < m_out.size(); ++y) {
        double best = kInfiniteCost;
        for (std::size_t x = 0; x < D.size(); ++x) {
            if (from.group_of_label[x] != to.group_of_label[y]) continue;
            double h = std::isinf(D[x]) ? kInfiniteCost : gamma * D[x] - m_in[x];
            if (h < best) best = h;
        }
        m_out[y] = best;
    }
    double delta = kInfiniteCost;
    for (double v : m_out)
        if (v < delta) delta = v;
    if (!std::isfinite(delta)) delta = 0;
    for (double& v : m_out) v -= delta;
    return delta;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Incidence {
    int edge = -1;
    int other = -1;
    bool is_a = false;  // this node is the edge's endpoint a
};

struct Workspace {
    const SuperGraph& sg;
    std::vector<std::vector<Incidence>> inc;   // per node
    std::vector<std::vector<double>> msg_ab;   // per edge, over labels of b
    std::vector<std::vector<double>> msg_ba;   // per edge, over labels of a
    std::vector<double> gamma;

    explicit Workspace(const SuperGraph& g) : sg(g) {
        int n = static_cast<int>(g.nodes.size());
        inc.resize(n);
        msg_ab.resize(g.edges.size());
        msg_ba.resize(g.edges.size());
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const ConsistencyEdge& ce = g.edges[e];
            inc[ce.a].push_back({static_cast<int>(e), ce.b, true});
            inc[ce.b].push_back({static_cast<int>(e), ce.a, false});
            msg_ab[e].assign(g.nodes[ce.b].labels.size(), 0.0);
            msg_ba[e].assign(g.nodes[ce.a].labels.size(), 0.0);
        }
        gamma.resize(n);
        for (int i = 0; i < n; ++i) {
            int fwd = 0, bwd = 0;
            for (const Incidence& in : inc[i]) (in.other > i ? fwd : bwd)++;
            gamma[i] = 1.0 / std::max(1, std::max(fwd, bwd));
        }
    }

    std::span<double> msg_in(int node, const Incidence& in) {
        // message flowing toward `node` along this edge
        auto& m = in.is_a ? msg_ba[in.edge] : msg_ab[in.edge];
        (void)node;
        return m;
    }
    std::span<double> msg_out(int node, const Incidence& in) {
        auto& m = in.is_a ? msg_ab[in.edge] : msg_ba[in.edge];
        (void)node;
        return m;
    }
    const EdgeSide& side_of(int node, const Incidence& in) const {
        (void)node;
        return in.is_a ? sg.edges[in.edge].side_a : sg.edges[in.edge].side_b;
    }
    const EdgeSide& side_other(const Incidence& in) const {
        return in.is_a ? sg.edges[in.edge].side_b : sg.edges[in.edge].side_a;
    }

    void compute_belief(int i, std::vector<double>& D) const {
        D = sg.nodes[i].unary;
        for (const Incidence& in : inc[i]) {
            auto& m = in.is_a ? msg_ba[in.edge] : msg_ab[in.edge];
            for (std::size_t x = 0; x < D.size(); ++x) D[x] += m[x];
        }
    }
};

// Greedy label choice for node i respecting already-fixed earlier
// neighbors; falls back to the unconditioned argmin when every label is
// blocked. Ties go to the lower index.
int pick_label(const Workspace& ws, int i, const std::vector<double>& D,
               const std::vector<int>& fixed) {
    thread_local std::vector<char> blocked;
    blocked.assign(D.size(), 0);
    bool any_mask = false;
    for (const Incidence& in : ws.inc[i]) {
        if (in.other >= i || fixed[in.other] < 0) continue;
        const EdgeSide& mine = ws.side_of(i, in);
        const EdgeSide& theirs = ws.side_other(in);
        int g = theirs.group_of_label[fixed[in.other]];
        for (std::size_t x = 0; x < D.size(); ++x)
            if (mine.group_of_label[x] != g) blocked[x] = 1;
        any_mask = true;
    }
    int best = -1;
    double best_v = kInfiniteCost;
    for (std::size_t x = 0; x < D.size(); ++x) {
        if (any_mask && blocked[x]) continue;
        if (best < 0 || D[x] < best_v) {
            best = static_cast<int>(x);
            best_v = D[x];
        }
    }
    if (best < 0) {
        best = 0;
        for (std::size_t x = 1; x < D.size(); ++x)
            if (D[x] < D[best]) best = static_cast<int>(x);
    }
    return best;
}

SolveResult finish(const SuperGraph& sg, SolveResult res) {
    DecodeResult dec = decode(sg, res.labeling);
    res.base = std::move(dec.labeling);
    res.consistent = dec.consistent;
    if (std::isfinite(res.lower_bound)) {
        res.relative_gap = (res.energy - res.lower_bound) /
                           std::max(std::fabs(res.lower_bound), 1e-12);
    }
    return res;
}

SolveResult run_trws(const SuperGraph& sg, const SolverOptions& opts) {
    Workspace ws(sg);
    int n = static_cast<int>(sg.nodes.size());
    SolveResult res;
    res.labeling.values.assign(n, 0);

    std::vector<int> fixed(n, -1);
    std::vector<double> D;
    std::vector<double> lb_hist;
    auto t0 = Clock::now();

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        // forward pass, extracting a primal solution along the way
        std::fill(fixed.begin(), fixed.end(), -1);
        for (int i = 0; i < n; ++i) {
            ws.compute_belief(i, D);
            fixed[i] = pick_label(ws, i, D, fixed);
            for (const Incidence& in : ws.inc[i]) {
                if (in.other <= i) continue;
                send_message_grouped(D, ws.msg_in(i, in), ws.gamma[i],
                                     ws.side_of(i, in), ws.side_other(in),
                                     sg.edges[in.edge].num_groups,
                                     ws.msg_out(i, in));
            }
        }
        SuperLabeling cand{fixed};
        double cand_energy = super_energy(sg, cand);
        if (cand_energy < res.energy) {
            res.energy = cand_energy;
            res.labeling = cand;
        }

        // backward pass accumulating the lower bound
        double lb = 0;
        for (int i = n - 1; i >= 0; --i) {
            ws.compute_belief(i, D);
            double dmin = kInfiniteCost;
            for (double v : D)
                if (v < dmin) dmin = v;
            if (!std::isfinite(dmin)) {
                lb = kInfiniteCost;  // node has no finite belief: infeasible
                break;
            }
            lb += dmin;
            for (double& v : D) v -= dmin;
            for (const Incidence& in : ws.inc[i]) {
                if (in.other >= i) continue;
                lb += send_message_grouped(D, ws.msg_in(i, in), ws.gamma[i],
                                           ws.side_of(i, in), ws.side_other(in),
                                           sg.edges[in.edge].num_groups,
                                           ws.msg_out(i, in));
            }
        }
        if (lb > res.lower_bound) res.lower_bound = lb;
        res.iterations = iter;

        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (opts.record_trace)
            res.trace.push_back({iter, res.lower_bound, res.energy, ms});

        if (std::isinf(lb) && lb > 0) break;
        if (res.energy <=
            res.lower_bound + opts.lb_stall_tolerance *
                                  std::max(1.0, std::fabs(res.lower_bound)))
            break;
        lb_hist.push_back(res.lower_bound);
        if (static_cast<int>(lb_hist.size()) > opts.stall_window) {
            double old = lb_hist[lb_hist.size() - 1 - opts.stall_window];
            if (res.lower_bound - old <= opts.lb_stall_tolerance) break;
        }
    }
    return finish(sg, std::move(res));
}

SolveResult run_lbp(const SuperGraph& sg, const SolverOptions& opts) {
    Workspace ws(sg);
    int n = static_cast<int>(sg.nodes.size());
    SolveResult res;
    res.labeling.values.assign(n, 0);

    std::vector<std::vector<double>> new_ab = ws.msg_ab, new_ba = ws.msg_ba;
    std::vector<int> fixed(n, -1);
    std::vector<double> D;
    auto t0 = Clock::now();

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        double max_change = 0;
        // synchronous flood: every directed message from previous beliefs
        for (int i = 0; i < n; ++i) {
            ws.compute_belief(i, D);
            for (const Incidence& in : ws.inc[i]) {
                auto& out = in.is_a ? new_ab[in.edge] : new_ba[in.edge];
                send_message_grouped(D, ws.msg_in(i, in), 1.0, ws.side_of(i, in),
                                     ws.side_other(in),
                                     sg.edges[in.edge].num_groups, out);
            }
        }
        for (std::size_t e = 0; e < sg.edges.size(); ++e) {
            for (std::size_t y = 0; y < new_ab[e].size(); ++y)
                max_change = std::max(max_change,
                                      std::fabs(new_ab[e][y] - ws.msg_ab[e][y]));
            for (std::size_t y = 0; y < new_ba[e].size(); ++y)
                max_change = std::max(max_change,
                                      std::fabs(new_ba[e][y] - ws.msg_ba[e][y]));
            ws.msg_ab[e] = new_ab[e];
            ws.msg_ba[e] = new_ba[e];
        }

        std::fill(fixed.begin(), fixed.end(), -1);
        for (int i = 0; i < n; ++i) {
            ws.compute_belief(i, D);
            fixed[i] = pick_label(ws, i, D, fixed);
        }
        SuperLabeling cand{fixed};
        double cand_energy = super_energy(sg, cand);
        if (cand_energy < res.energy) {
            res.energy = cand_energy;
            res.labeling = cand;
        }
        res.iterations = iter;
        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (opts.record_trace)
            res.trace.push_back({iter, res.lower_bound, res.energy, ms});
        if (max_change <= opts.lb_stall_tolerance) break;
    }
    return finish(sg, std::move(res));
}

}  // namespace

SolveResult run(const SuperGraph& sg, const SolverOptions& opts) {
    return opts.algorithm == Algorithm::TRWS ? run_trws(sg, opts)
                                             : run_lbp(sg, opts);
}

namespace {

struct PairwiseEdge {
    int a = -1, b = -1;               // a < b
    std::vector<double> table;        // indexed x_a * L_b + x_b
    std::vector<double> m_ab, m_ba;   // messages over receiver labels
};

}  // namespace

PairwiseSolveResult run_pairwise(const FactorGraph& graph,
                                 const SolverOptions& opts) {
    graph.validate();
    int n = graph.num_vars;
    std::vector<std::vector<double>> unary(n);
    for (int i = 0; i < n; ++i) unary[i].assign(graph.label_counts[i], 0.0);

    std::vector<PairwiseEdge> edges;
    std::map<std::pair<int, int>, int> edge_index;
    for (const Factor& f : graph.factors) {
        if (f.scope.size() == 1) {
            for (std::size_t x = 0; x < f.table.size(); ++x)
                unary[f.scope[0]][x] += f.table[x];
        } else if (f.scope.size() == 2) {
            auto key = std::make_pair(f.scope[0], f.scope[1]);
            auto [it, fresh] = edge_index.try_emplace(
                key, static_cast<int>(edges.size()));
            if (fresh) {
                PairwiseEdge e;
                e.a = key.first;
                e.b = key.second;
                e.table.assign(f.table.size(), 0.0);
                e.m_ab.assign(graph.label_counts[e.b], 0.0);
                e.m_ba.assign(graph.label_counts[e.a], 0.0);
                edges.push_back(std::move(e));
            }
            auto& tab = edges[it->second].table;
            for (std::size_t x = 0; x < f.table.size(); ++x) tab[x] += f.table[x];
        } else {
            throw InputError("pairwise solver given a factor of arity > 2");
        }
    }

    std::vector<std::vector<std::pair<int, bool>>> inc(n);  // (edge, node is a)
    for (std::size_t e = 0; e < edges.size(); ++e) {
        inc[edges[e].a].push_back({static_cast<int>(e), true});
        inc[edges[e].b].push_back({static_cast<int>(e), false});
    }
    std::vector<double> gamma(n);
    for (int i = 0; i < n; ++i) {
        int fwd = 0, bwd = 0;
        for (auto [e, is_a] : inc[i])
            ((is_a ? edges[e].b : edges[e].a) > i ? fwd : bwd)++;
        gamma[i] = 1.0 / std::max(1, std::max(fwd, bwd));
    }

    auto theta = [&](const PairwiseEdge& e, int xa, int xb) {
        return e.table[static_cast<std::size_t>(xa) * graph.label_counts[e.b] + xb];
    };
    // m_out[y] = min_x theta(x, y) + h[x], then normalized; returns delta
    auto send = [&](const PairwiseEdge& e, bool from_a,
                    const std::vector<double>& D, std::vector<double>& m_in,
                    std::vector<double>& m_out, double g) {
        for (std::size_t y = 0; y < m_out.size(); ++y) {
            double best = kInfiniteCost;
            for (std::size_t x = 0; x < D.size(); ++x) {
                if (std::isinf(D[x])) continue;
                double h = g * D[x] - m_in[x];
                double t = from_a ? theta(e, static_cast<int>(x), static_cast<int>(y))
                                  : theta(e, static_cast<int>(y), static_cast<int>(x));
                if (t + h < best) best = t + h;
            }
            m_out[y] = best;
        }
        double delta = kInfiniteCost;
        for (double v : m_out)
            if (v < delta) delta = v;
        if (!std::isfinite(delta)) delta = 0;
        for (double& v : m_out) v -= delta;
        return delta;
    };

    auto belief = [&](int i, std::vector<double>& D) {
        D = unary[i];
        for (auto [e, is_a] : inc[i]) {
            auto& m = is_a ? edges[e].m_ba : edges[e].m_ab;
            for (std::size_t x = 0; x < D.size(); ++x) D[x] += m[x];
        }
    };

    PairwiseSolveResult res;
    res.labeling.values.assign(n, 0);
    std::vector<int> fixed(n, -1);
    std::vector<double> D;
    std::vector<double> lb_hist;

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        std::fill(fixed.begin(), fixed.end(), -1);
        for (int i = 0; i < n; ++i) {
            belief(i, D);
            // condition on already-fixed earlier neighbors
            int best = -1;
            double best_v = kInfiniteCost;
            for (std::size_t x = 0; x < D.size(); ++x) {
                double v = D[x];
                for (auto [e, is_a] : inc[i]) {
                    int other = is_a ? edges[e].b : edges[e].a;
                    if (other >= i || fixed[other] < 0) continue;
                    v += is_a ? theta(edges[e], static_cast<int>(x), fixed[other])
                              : theta(edges[e], fixed[other], static_cast<int>(x));
                }
                if (best < 0 || v < best_v) {
                    best = static_cast<int>(x);
                    best_v = v;
                }
            }
            fixed[i] = best;
            for (auto [e, is_a] : inc[i]) {
                int other = is_a ? edges[e].b : edges[e].a;
                if (other <= i) continue;
                auto& m_in = is_a ? edges[e].m_ba : edges[e].m_ab;
                auto& m_out = is_a ? edges[e].m_ab : edges[e].m_ba;
                send(edges[e], is_a, D, m_in, m_out, gamma[i]);
            }
        }
        Labeling cand{fixed};
        double cand_energy = evaluate(graph, cand);
        if (cand_energy < res.energy) {
            res.energy = cand_energy;
            res.labeling = cand;
        }

        double lb = 0;
        for (int i = n - 1; i >= 0; --i) {
            belief(i, D);
            double dmin = kInfiniteCost;
            for (double v : D)
                if (v < dmin) dmin = v;
            if (!std::isfinite(dmin)) {
                lb = kInfiniteCost;
                break;
            }
            lb += dmin;
            for (double& v : D) v -= dmin;
            for (auto [e, is_a] : inc[i]) {
                int other = is_a ? edges[e].b : edges[e].a;
                if (other >= i) continue;
                auto& m_in = is_a ? edges[e].m_ba : edges[e].m_ab;
                auto& m_out = is_a ? edges[e].m_ab : edges[e].m_ba;
                lb += send(edges[e], is_a, D, m_in, m_out, gamma[i]);
            }
        }
        if (lb > res.lower_bound) res.lower_bound = lb;
        res.iterations = iter;

        if (std::isinf(lb) && lb > 0) break;
        if (res.energy <=
            res.lower_bound + opts.lb_stall_tolerance *
                                  std::max(1.0, std::fabs(res.lower_bound)))
            break;
        lb_hist.push_back(res.lower_bound);
        if (static_cast<int>(lb_hist.size()) > opts.stall_window) {
            double old = lb_hist[lb_hist.size() - 1 - opts.stall_window];
            if (res.lower_bound - old <= opts.lb_stall_tolerance) break;
        }
    }
    return res;
}

}  // namespace patchopt
